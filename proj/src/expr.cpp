#include "lrp/expr.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <optional>

namespace lrp {

namespace {

bool is_ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
bool is_ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }
bool is_digit(char c) { return std::isdigit(static_cast<unsigned char>(c)) != 0; }

enum class Tok { number, ident, keyword, lparen, rparen, end };

struct Token {
  Tok kind = Tok::end;
  std::string_view text;
  std::size_t offset = 0;
  double number = 0.0;
};

class ExprParser {
 public:
  explicit ExprParser(std::string_view text) : text_(text) {}

  Expected<ExprPtr, ExprParseError> run() {
    if (auto err = advance()) return unexpected(std::move(*err));
    if (tok_.kind == Tok::end) return fail("empty expression");
    auto e = expression();
    if (!e) return e;
    if (tok_.kind != Tok::end) return fail("unexpected '" + std::string(tok_.text) + "'");
    return e;
  }

 private:
  Unexpected<ExprParseError> fail(std::string msg) const {
    return unexpected(ExprParseError{tok_.offset, std::move(msg)});
  }

  std::optional<ExprParseError> advance() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    tok_ = Token{};
    tok_.offset = pos_;
    if (pos_ >= text_.size()) return std::nullopt;
    const char c = text_[pos_];
    if (c == '(' || c == ')') {
      tok_.kind = c == '(' ? Tok::lparen : Tok::rparen;
      tok_.text = text_.substr(pos_++, 1);
      return std::nullopt;
    }
    const bool negative = c == '-' && pos_ + 1 < text_.size() && is_digit(text_[pos_ + 1]);
    if (is_digit(c) || negative) {
      std::size_t end = pos_ + (negative ? 1 : 0);
      while (end < text_.size() && is_digit(text_[end])) ++end;
      if (end + 1 < text_.size() && text_[end] == '.' && is_digit(text_[end + 1])) {
        ++end;
        while (end < text_.size() && is_digit(text_[end])) ++end;
      }
      if (end < text_.size() && (text_[end] == 'e' || text_[end] == 'E')) {
        std::size_t exp = end + 1;
        if (exp < text_.size() && (text_[exp] == '-' || text_[exp] == '+')) ++exp;
        if (exp < text_.size() && is_digit(text_[exp])) {
          end = exp;
          while (end < text_.size() && is_digit(text_[end])) ++end;
        }
      }
      tok_.kind = Tok::number;
      tok_.text = text_.substr(pos_, end - pos_);
      const auto [ptr, ec] = std::from_chars(tok_.text.data(), tok_.text.data() + tok_.text.size(),
                                             tok_.number);
      if (ec != std::errc{} || !std::isfinite(tok_.number)) {
        return ExprParseError{pos_, "number out of range"};
      }
      pos_ = end;
      return std::nullopt;
    }
    if (is_ident_start(c)) {
      std::size_t end = pos_ + 1;
      while (end < text_.size() && is_ident_char(text_[end])) ++end;
      if (end < text_.size() && text_[end] == ':' && (end + 1 >= text_.size() || text_[end + 1] != '=')) {
        tok_.kind = Tok::keyword;
        ++end;
      } else {
        tok_.kind = Tok::ident;
      }
      tok_.text = text_.substr(pos_, end - pos_);
      pos_ = end;
      return std::nullopt;
    }
    return ExprParseError{pos_, std::string("unexpected character '") + c + "'"};
  }

  Expected<ExprPtr, ExprParseError> expression() {
    auto receiver = unary();
    if (!receiver) return receiver;
    if (tok_.kind != Tok::keyword) return receiver;
    KeywordMessage msg;
    msg.receiver = std::move(receiver.value());
    while (tok_.kind == Tok::keyword) {
      msg.selector += tok_.text;
      if (auto err = advance()) return unexpected(std::move(*err));
      auto arg = unary();
      if (!arg) return arg;
      msg.args.push_back(std::move(arg.value()));
    }
    return std::make_shared<const Expr>(Expr{std::move(msg)});
  }

  Expected<ExprPtr, ExprParseError> unary() {
    auto e = primary();
    if (!e) return e;
    ExprPtr current = std::move(e.value());
    while (tok_.kind == Tok::ident) {
      current = std::make_shared<const Expr>(Expr{UnaryMessage{current, std::string(tok_.text)}});
      if (auto err = advance()) return unexpected(std::move(*err));
    }
    return current;
  }

  Expected<ExprPtr, ExprParseError> primary() {
    switch (tok_.kind) {
      case Tok::number: {
        auto e = std::make_shared<const Expr>(Expr{NumberLiteral{tok_.number}});
        if (auto err = advance()) return unexpected(std::move(*err));
        return e;
      }
      case Tok::ident: {
        ExprPtr e;
        if (tok_.text == "true" || tok_.text == "false") {
          e = std::make_shared<const Expr>(Expr{BooleanLiteral{tok_.text == "true"}});
        } else {
          e = std::make_shared<const Expr>(Expr{VarRef{std::string(tok_.text)}});
        }
        if (auto err = advance()) return unexpected(std::move(*err));
        return e;
      }
      case Tok::lparen: {
        if (++depth_ > kMaxDepth) return fail("expression nested too deeply");
        if (auto err = advance()) return unexpected(std::move(*err));
        if (tok_.kind == Tok::rparen) return fail("empty parentheses");
        auto inner = expression();
        if (!inner) return inner;
        if (tok_.kind != Tok::rparen) return fail("expected ')'");
        if (auto err = advance()) return unexpected(std::move(*err));
        --depth_;
        return std::make_shared<const Expr>(Expr{Parenthesized{std::move(inner.value())}});
      }
      case Tok::keyword:
        return fail("keyword '" + std::string(tok_.text) + "' without receiver");
      case Tok::rparen:
        return fail("unbalanced ')'");
      case Tok::end:
        return fail("unexpected end of expression");
    }
    return fail("unexpected token");
  }

  static constexpr int kMaxDepth = 256;

  std::string_view text_;
  std::size_t pos_ = 0;
  int depth_ = 0;
  Token tok_;
};

void print_into(const Expr& e, std::string& out);

// A keyword argument that is itself a keyword message needs parentheses to
// read back the same way.
void print_operand(const Expr& e, std::string& out, bool allow_keyword) {
  if (!allow_keyword && std::holds_alternative<KeywordMessage>(e.node)) {
    out += '(';
    print_into(e, out);
    out += ')';
  } else {
    print_into(e, out);
  }
}

void print_into(const Expr& e, std::string& out) {
  std::visit(
      [&out](const auto& n) {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, NumberLiteral>) {
          out += format_number(n.value);
        } else if constexpr (std::is_same_v<T, BooleanLiteral>) {
          out += n.value ? "true" : "false";
        } else if constexpr (std::is_same_v<T, VarRef>) {
          out += n.name;
        } else if constexpr (std::is_same_v<T, UnaryMessage>) {
          print_operand(*n.receiver, out, false);
          out += ' ';
          out += n.selector;
        } else if constexpr (std::is_same_v<T, KeywordMessage>) {
          print_operand(*n.receiver, out, false);
          std::size_t part_begin = 0;
          for (const auto& arg : n.args) {
            const auto colon = n.selector.find(':', part_begin);
            out += ' ';
            out += n.selector.substr(part_begin, colon + 1 - part_begin);
            out += ' ';
            print_operand(*arg, out, false);
            part_begin = colon + 1;
          }
        } else {
          out += '(';
          print_into(*n.inner, out);
          out += ')';
        }
      },
      e.node);
}

}  // namespace

bool same_expr(const ExprPtr& a, const ExprPtr& b) {
  if (a == b) return true;
  if (!a || !b) return false;
  return *a == *b;
}

bool operator==(const Expr& a, const Expr& b) {
  if (a.node.index() != b.node.index()) return false;
  return std::visit(
      [&b](const auto& x) -> bool {
        using T = std::decay_t<decltype(x)>;
        const auto& y = std::get<T>(b.node);
        if constexpr (std::is_same_v<T, NumberLiteral>) {
          return x.value == y.value;
        } else if constexpr (std::is_same_v<T, BooleanLiteral>) {
          return x.value == y.value;
        } else if constexpr (std::is_same_v<T, VarRef>) {
          return x.name == y.name;
        } else if constexpr (std::is_same_v<T, UnaryMessage>) {
          return x.selector == y.selector && same_expr(x.receiver, y.receiver);
        } else if constexpr (std::is_same_v<T, KeywordMessage>) {
          return x.selector == y.selector && same_expr(x.receiver, y.receiver) &&
                 std::equal(x.args.begin(), x.args.end(), y.args.begin(), y.args.end(), same_expr);
        } else {
          return same_expr(x.inner, y.inner);
        }
      },
      a.node);
}

Expected<ExprPtr, ExprParseError> parse_expr(std::string_view text) {
  return ExprParser(text).run();
}

std::string print_expr(const Expr& e) {
  std::string out;
  print_into(e, out);
  return out;
}

std::size_t keyword_arity(std::string_view selector) noexcept {
  return static_cast<std::size_t>(std::count(selector.begin(), selector.end(), ':'));
}

std::string format_number(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

}  // namespace lrp
