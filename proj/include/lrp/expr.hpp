#pragma once

// The action-block language: a closed keyword-message subset.
//
//   expr     := unary (KEYWORD unary)*
//   unary    := primary IDENT*
//   primary  := NUMBER | true | false | IDENT | '(' expr ')'
//
// Unary messages bind tighter than keyword messages; the keyword parts of one
// send are concatenated into a single selector ("at:put:").

#include <cstddef>
#include <memory>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "lrp/expected.hpp"

namespace lrp {

struct Expr;
using ExprPtr = std::shared_ptr<const Expr>;

struct NumberLiteral {
  double value = 0.0;
};
struct BooleanLiteral {
  bool value = false;
};
struct VarRef {
  std::string name;
};
struct UnaryMessage {
  ExprPtr receiver;
  std::string selector;
};
struct KeywordMessage {
  ExprPtr receiver;
  std::string selector;  // e.g. "isThereAnObstacle:"
  std::vector<ExprPtr> args;
};
struct Parenthesized {
  ExprPtr inner;
};

struct Expr {
  std::variant<NumberLiteral, BooleanLiteral, VarRef, UnaryMessage, KeywordMessage, Parenthesized>
      node;
};

/// Deep structural equality.
bool operator==(const Expr& a, const Expr& b);
bool same_expr(const ExprPtr& a, const ExprPtr& b);

struct ExprParseError {
  std::size_t offset = 0;  // byte offset into the parsed text
  std::string message;
};

Expected<ExprPtr, ExprParseError> parse_expr(std::string_view text);

/// Canonical text; parse_expr(print_expr(e)) is structurally equal to e.
std::string print_expr(const Expr& e);

/// Number of ':'-terminated parts in a keyword selector.
std::size_t keyword_arity(std::string_view selector) noexcept;

/// Shortest text that reads back as the same double.
std::string format_number(double v);

}  // namespace lrp
