#include "lrp/syntax.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <set>

namespace lrp {

namespace {

constexpr int kMaxNesting = 256;

bool ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
bool ident_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-';
}

// Generic S-expression tree: the reader knows nothing about LRP forms.
struct Sexp {
  enum class Kind { atom, number, list, block };
  Kind kind = Kind::atom;
  std::string text;  // atom / number text, or block interior
  std::vector<Sexp> items;
  SourcePos pos;
  std::size_t offset = 0;  // byte offset of block interior

  bool is_atom(std::string_view s) const { return kind == Kind::atom && text == s; }
};

class Reader {
 public:
  explicit Reader(std::string_view src) : src_(src) {}

  Expected<std::vector<Sexp>, ParseFailure> read_all() {
    std::vector<Sexp> stack;  // open lists
    std::vector<Sexp> top;
    auto push_item = [&](Sexp item) {
      if (stack.empty()) {
        top.push_back(std::move(item));
      } else {
        stack.back().items.push_back(std::move(item));
      }
    };
    while (true) {
      skip_space();
      if (at_end()) break;
      const SourcePos here = pos();
      const char c = src_[i_];
      if (c == '(') {
        if (static_cast<int>(stack.size()) >= kMaxNesting) return fail(here, "forms nested too deeply");
        Sexp list;
        list.kind = Sexp::Kind::list;
        list.pos = here;
        stack.push_back(std::move(list));
        bump();
      } else if (c == ')') {
        if (stack.empty()) return fail(here, "unbalanced parenthesis: unexpected ')'");
        bump();
        Sexp done = std::move(stack.back());
        stack.pop_back();
        push_item(std::move(done));
      } else if (c == '[') {
        auto block = read_block();
        if (!block) return unexpected(std::move(block).error());
        push_item(std::move(block.value()));
      } else if (c == ']') {
        return fail(here, "unbalanced bracket: unexpected ']'");
      } else if (c == '-' && peek(1) == '>') {
        bump();
        bump();
        push_item(Sexp{Sexp::Kind::atom, "->", {}, here, 0});
      } else if (c == ':' && peek(1) == '=') {
        bump();
        bump();
        push_item(Sexp{Sexp::Kind::atom, ":=", {}, here, 0});
      } else if (std::isdigit(static_cast<unsigned char>(c))) {
        const std::size_t begin = i_;
        while (!at_end() && (std::isdigit(static_cast<unsigned char>(src_[i_])) || src_[i_] == '.')) bump();
        push_item(Sexp{Sexp::Kind::number, std::string(src_.substr(begin, i_ - begin)), {}, here, 0});
      } else if (ident_start(c)) {
        const std::size_t begin = i_;
        bump();
        while (!at_end() && ident_char(src_[i_]) && !(src_[i_] == '-' && peek(1) == '>')) bump();
        push_item(Sexp{Sexp::Kind::atom, std::string(src_.substr(begin, i_ - begin)), {}, here, 0});
      } else {
        std::string shown = std::isprint(static_cast<unsigned char>(c))
                                ? std::string(1, c)
                                : "\\x" + to_hex(static_cast<unsigned char>(c));
        return fail(here, "unexpected character '" + shown + "'");
      }
    }
    if (!stack.empty()) {
      return fail(pos(), "unbalanced parenthesis: missing ')' at end of input (form opened at " +
                             std::to_string(stack.back().pos.line) + ":" +
                             std::to_string(stack.back().pos.column) + ")");
    }
    return top;
  }

  /// Line/column for a byte offset.
  SourcePos position_of(std::size_t offset) const {
    SourcePos p{1, 1};
    for (std::size_t k = 0; k < offset && k < src_.size(); ++k) {
      if (src_[k] == '\n') {
        ++p.line;
        p.column = 1;
      } else {
        ++p.column;
      }
    }
    return p;
  }

 private:
  static std::string to_hex(unsigned char c) {
    static constexpr char digits[] = "0123456789abcdef";
    return {digits[c >> 4], digits[c & 0xf]};
  }

  static Unexpected<ParseFailure> fail(SourcePos p, std::string msg) {
    return unexpected(ParseFailure{p.line, p.column, std::move(msg)});
  }

  bool at_end() const { return i_ >= src_.size(); }
  char peek(std::size_t ahead) const { return i_ + ahead < src_.size() ? src_[i_ + ahead] : '\0'; }
  SourcePos pos() const { return {line_, col_}; }

  void bump() {
    if (src_[i_] == '\n') {
      ++line_;
      col_ = 1;
    } else {
      ++col_;
    }
    ++i_;
  }

  void skip_space() {
    while (!at_end()) {
      const char c = src_[i_];
      if (c == ';') {
        while (!at_end() && src_[i_] != '\n') bump();
      } else if (std::isspace(static_cast<unsigned char>(c))) {
        bump();
      } else {
        break;
      }
    }
  }

  Expected<Sexp, ParseFailure> read_block() {
    const SourcePos open = pos();
    bump();
    const std::size_t begin = i_;
    int depth = 1;
    while (!at_end()) {
      if (src_[i_] == '[') ++depth;
      if (src_[i_] == ']' && --depth == 0) break;
      bump();
    }
    if (at_end()) return fail(open, "unterminated action block: missing ']'");
    Sexp block;
    block.kind = Sexp::Kind::block;
    block.text = std::string(src_.substr(begin, i_ - begin));
    block.pos = open;
    block.offset = begin;
    bump();
    return block;
  }

  std::string_view src_;
  std::size_t i_ = 0;
  int line_ = 1;
  int col_ = 1;
};

// Turns the generic tree into LRP declarations.
class FormBuilder {
 public:
  explicit FormBuilder(const Reader& reader) : reader_(reader) {}

  Expected<ProgramAST, ParseFailure> program(const std::vector<Sexp>& forms) {
    ProgramAST ast;
    for (const auto& form : forms) {
      if (form.kind != Sexp::Kind::list || form.items.empty() ||
          form.items.front().kind != Sexp::Kind::atom) {
        return fail(form.pos, "expected a top-level form like (var ...), (machine ...), or (spawn ...)");
      }
      const auto& head = form.items.front().text;
      if (head == "var") {
        auto v = variable(form);
        if (!v) return unexpected(std::move(v).error());
        ast.variables.push_back(std::move(v.value()));
      } else if (head == "machine") {
        auto m = machine(form);
        if (!m) return unexpected(std::move(m).error());
        ast.machines.push_back(std::move(m.value()));
      } else if (head == "spawn") {
        auto s = spawn(form);
        if (!s) return unexpected(std::move(s).error());
        ast.spawns.push_back(std::move(s.value()));
      } else {
        return fail(form.pos, "unknown top-level form '" + head + "'");
      }
    }
    return ast;
  }

 private:
  static Unexpected<ParseFailure> fail(SourcePos p, std::string msg) {
    return unexpected(ParseFailure{p.line, p.column, std::move(msg)});
  }

  static bool is_name(const Sexp& s) { return s.kind == Sexp::Kind::atom && ident_start(s.text[0]); }

  static std::string head_of(const Sexp& form) {
    return form.items.empty() ? std::string() : form.items.front().text;
  }

  Expected<ActionBlock, ParseFailure> block(const Sexp& s, std::string_view what) const {
    if (s.kind != Sexp::Kind::block) return fail(s.pos, std::string("expected [..] block for ") + std::string(what));
    auto expr = parse_expr(s.text);
    if (!expr) {
      const SourcePos p = reader_.position_of(s.offset + expr.error().offset);
      return fail(p, "in action block: " + expr.error().message);
    }
    return ActionBlock{s.text, std::move(expr.value()), s.pos};
  }

  Expected<VariableDecl, ParseFailure> variable(const Sexp& form) const {
    const auto& it = form.items;
    if (it.size() != 4 || !is_name(it[1]) || !it[2].is_atom(":=")) {
      return fail(form.pos, "malformed variable: expected (var NAME := [expr])");
    }
    auto init = block(it[3], "variable initializer");
    if (!init) return unexpected(std::move(init).error());
    return VariableDecl{it[1].text, std::move(init.value()), form.pos};
  }

  Expected<SpawnDirective, ParseFailure> spawn(const Sexp& form) const {
    const auto& it = form.items;
    if (it.size() != 3 || !is_name(it[1]) || !is_name(it[2])) {
      return fail(form.pos, "malformed spawn: expected (spawn MACHINE STATE)");
    }
    return SpawnDirective{it[1].text, it[2].text, form.pos};
  }

  Expected<std::shared_ptr<const MachineDecl>, ParseFailure> machine(const Sexp& form) const {
    const auto& it = form.items;
    if (it.size() < 2 || !is_name(it[1])) return fail(form.pos, "malformed machine: expected (machine NAME ...)");
    auto decl = std::make_shared<MachineDecl>();
    decl->name = it[1].text;
    decl->pos = form.pos;
    for (std::size_t k = 2; k < it.size(); ++k) {
      const Sexp& member = it[k];
      if (member.kind != Sexp::Kind::list || member.items.empty() ||
          member.items.front().kind != Sexp::Kind::atom) {
        return fail(member.pos, "expected a machine member form in machine " + decl->name);
      }
      const std::string head = head_of(member);
      if (head == "var") {
        auto v = variable(member);
        if (!v) return unexpected(std::move(v).error());
        decl->variables.push_back(std::move(v.value()));
      } else if (head == "state") {
        auto s = state(member);
        if (!s) return unexpected(std::move(s).error());
        decl->states.push_back(std::move(s.value()));
      } else if (head == "event") {
        if (member.items.size() != 3 || !is_name(member.items[1])) {
          return fail(member.pos, "malformed event: expected (event NAME [expr])");
        }
        auto guard = block(member.items[2], "event guard");
        if (!guard) return unexpected(std::move(guard).error());
        decl->events.push_back(EventDecl{member.items[1].text, std::move(guard.value()), member.pos});
      } else if (head == "on" || head == "ontime" || head == "eps") {
        auto t = transition(member);
        if (!t) return unexpected(std::move(t).error());
        decl->transitions.push_back(std::move(t.value()));
      } else {
        return fail(member.pos, "unknown form '" + head + "' in machine " + decl->name);
      }
    }
    return std::shared_ptr<const MachineDecl>(std::move(decl));
  }

  Expected<StateDecl, ParseFailure> state(const Sexp& form) const {
    const auto& it = form.items;
    if (it.size() < 2 || !is_name(it[1])) return fail(form.pos, "malformed state: expected (state NAME ...)");
    StateDecl decl;
    decl.name = it[1].text;
    decl.pos = form.pos;
    for (std::size_t k = 2; k < it.size(); ++k) {
      const Sexp& item = it[k];
      if (item.kind != Sexp::Kind::list || item.items.empty() ||
          item.items.front().kind != Sexp::Kind::atom) {
        return fail(item.pos, "expected a state item form in state " + decl.name);
      }
      const std::string head = head_of(item);
      std::optional<ActionBlock>* slot = nullptr;
      if (head == "onentry") slot = &decl.onentry;
      if (head == "running") slot = &decl.running;
      if (head == "onexit") slot = &decl.onexit;
      if (slot != nullptr) {
        if (slot->has_value()) return fail(item.pos, "duplicate " + head + " in state " + decl.name);
        if (item.items.size() != 2) return fail(item.pos, "malformed " + head + ": expected (" + head + " [expr])");
        auto b = block(item.items[1], head);
        if (!b) return unexpected(std::move(b).error());
        *slot = std::move(b.value());
      } else if (head == "machine") {
        if (decl.nested) return fail(item.pos, "state " + decl.name + " already has a nested machine");
        auto m = machine(item);
        if (!m) return unexpected(std::move(m).error());
        decl.nested = std::move(m.value());
      } else if (head == "spawn") {
        if (decl.nested_spawn) return fail(item.pos, "duplicate spawn in state " + decl.name);
        auto s = spawn(item);
        if (!s) return unexpected(std::move(s).error());
        decl.nested_spawn = std::move(s.value());
      } else {
        return fail(item.pos, "unknown form '" + head + "' in state " + decl.name);
      }
    }
    return decl;
  }

  Expected<TransitionDecl, ParseFailure> transition(const Sexp& form) const {
    const auto& it = form.items;
    const std::string head = head_of(form);
    TransitionDecl t;
    t.pos = form.pos;
    std::size_t k = 1;
    if (head == "on") {
      t.kind = TransitionKind::event;
      if (it.size() < 2 || !is_name(it[1])) return fail(form.pos, "malformed transition: expected (on EVENT SRC -> DST NAME)");
      t.event = it[1].text;
      k = 2;
    } else if (head == "ontime") {
      t.kind = TransitionKind::timeout;
      if (it.size() < 2 || it[1].kind != Sexp::Kind::number) {
        return fail(form.pos, "malformed transition: expected (ontime MILLIS SRC -> DST NAME)");
      }
      const auto& digits = it[1].text;
      const auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), t.duration_ms);
      if (ec != std::errc{} || ptr != digits.data() + digits.size()) {
        return fail(it[1].pos, "timeout duration must be an integer number of milliseconds");
      }
      k = 2;
    } else {
      t.kind = TransitionKind::epsilon;
    }
    const std::size_t rest = it.size() - k;
    if ((rest != 4 && rest != 5) || !is_name(it[k]) || !it[k + 1].is_atom("->") ||
        !is_name(it[k + 2]) || !is_name(it[k + 3])) {
      return fail(form.pos, "malformed transition: expected (" + head + (head == "eps" ? "" : " ...") +
                                " SRC -> DST NAME [action])");
    }
    t.source = it[k].text;
    t.target = it[k + 2].text;
    t.name = it[k + 3].text;
    if (rest == 5) {
      auto b = block(it[k + 4], "transition action");
      if (!b) return unexpected(std::move(b).error());
      t.action = std::move(b.value());
    }
    return t;
  }

  const Reader& reader_;
};

// --- validation -------------------------------------------------------------

Diagnostic diag(std::string code, std::string message, std::string where, SourcePos p) {
  return Diagnostic{Severity::warning, std::move(code), std::move(message), std::move(where), p.line, p.column};
}

template <typename Range, typename NameOf>
void check_unique(const Range& items, NameOf name_of, std::string_view what, const std::string& where,
                  Diagnostics& out) {
  std::set<std::string, std::less<>> seen;
  for (const auto& item : items) {
    const auto& [name, pos] = name_of(item);
    if (!seen.insert(name).second) {
      out.push_back(diag("duplicate-name", "duplicate " + std::string(what) + " " + name, where, pos));
    }
  }
}

void check_spawn(const SpawnDirective& s, const MachineDecl* m, const std::string& where, Diagnostics& out) {
  if (m == nullptr) {
    out.push_back(diag("unknown-machine", "unknown machine " + s.machine, where, s.pos));
  } else if (m->find_state(s.state) == nullptr) {
    out.push_back(diag("unknown-state", "unknown state " + s.state + " in machine " + s.machine, where, s.pos));
  }
}

void validate_machine(const MachineDecl& m, const std::string& path,
                      std::vector<const MachineDecl*>& enclosing, Diagnostics& out) {
  check_unique(m.variables, [](const VariableDecl& v) { return std::pair{v.name, v.pos}; }, "variable", path, out);
  check_unique(m.states, [](const StateDecl& s) { return std::pair{s.name, s.pos}; }, "state", path, out);
  check_unique(m.transitions, [](const TransitionDecl& t) { return std::pair{t.name, t.pos}; }, "transition", path, out);
  check_unique(m.events, [](const EventDecl& e) { return std::pair{e.name, e.pos}; }, "event", path, out);

  enclosing.push_back(&m);
  for (const auto& t : m.transitions) {
    if (m.find_state(t.source) == nullptr) {
      out.push_back(diag("unresolved-name", "unknown source state " + t.source, path, t.pos));
    }
    if (m.find_state(t.target) == nullptr) {
      out.push_back(diag("unresolved-name", "unknown target state " + t.target, path, t.pos));
    }
    if (t.kind == TransitionKind::event) {
      const bool found = std::any_of(enclosing.begin(), enclosing.end(),
                                     [&t](const MachineDecl* e) { return e->find_event(t.event) != nullptr; });
      if (!found) out.push_back(diag("unresolved-name", "unknown event " + t.event, path, t.pos));
    }
    if (t.kind == TransitionKind::timeout && t.duration_ms <= 0) {
      out.push_back(diag("bad-timeout", "timeout duration must be positive in transition " + t.name, path, t.pos));
    }
  }
  for (const auto& s : m.states) {
    const std::string state_path = path + "/" + s.name;
    if (s.nested_spawn) {
      const MachineDecl* target =
          (s.nested && s.nested->name == s.nested_spawn->machine) ? s.nested.get() : nullptr;
      check_spawn(*s.nested_spawn, target, state_path, out);
    }
    if (s.nested) validate_machine(*s.nested, state_path + "/" + s.nested->name, enclosing, out);
  }
  enclosing.pop_back();
}

// --- printing ---------------------------------------------------------------

void indent(std::string& out, int level) { out.append(static_cast<std::size_t>(level) * 2, ' '); }

void print_block(const ActionBlock& b, std::string& out) {
  out += '[';
  out += b.canonical();
  out += ']';
}

void print_machine(const MachineDecl& m, std::string& out, int level);

void print_state(const StateDecl& s, std::string& out, int level) {
  indent(out, level);
  out += "(state " + s.name;
  auto item = [&](const char* head, const std::optional<ActionBlock>& b) {
    if (!b) return;
    out += '\n';
    indent(out, level + 1);
    out += std::string("(") + head + " ";
    print_block(*b, out);
    out += ')';
  };
  item("onentry", s.onentry);
  item("running", s.running);
  item("onexit", s.onexit);
  if (s.nested) {
    out += '\n';
    print_machine(*s.nested, out, level + 1);
  }
  if (s.nested_spawn) {
    out += '\n';
    indent(out, level + 1);
    out += "(spawn " + s.nested_spawn->machine + " " + s.nested_spawn->state + ")";
  }
  out += ')';
}

void print_machine(const MachineDecl& m, std::string& out, int level) {
  indent(out, level);
  out += "(machine " + m.name;
  for (const auto& v : m.variables) {
    out += '\n';
    indent(out, level + 1);
    out += "(var " + v.name + " := ";
    print_block(v.init, out);
    out += ')';
  }
  for (const auto& s : m.states) {
    out += '\n';
    print_state(s, out, level + 1);
  }
  for (const auto& t : m.transitions) {
    out += '\n';
    indent(out, level + 1);
    switch (t.kind) {
      case TransitionKind::event:
        out += "(on " + t.event + " ";
        break;
      case TransitionKind::timeout:
        out += "(ontime " + std::to_string(t.duration_ms) + " ";
        break;
      case TransitionKind::epsilon:
        out += "(eps ";
        break;
    }
    out += t.source + " -> " + t.target + " " + t.name;
    if (t.action) {
      out += ' ';
      print_block(*t.action, out);
    }
    out += ')';
  }
  for (const auto& e : m.events) {
    out += '\n';
    indent(out, level + 1);
    out += "(event " + e.name + " ";
    print_block(e.guard, out);
    out += ')';
  }
  out += ')';
}

bool same_machine_ptr(const std::shared_ptr<const MachineDecl>& a, const std::shared_ptr<const MachineDecl>& b) {
  if (a == b) return true;
  if (!a || !b) return false;
  return *a == *b;
}

}  // namespace

bool StateDecl::operator==(const StateDecl& o) const {
  return name == o.name && onentry == o.onentry && running == o.running && onexit == o.onexit &&
         same_machine_ptr(nested, o.nested) && nested_spawn == o.nested_spawn;
}

bool MachineDecl::operator==(const MachineDecl& o) const {
  return name == o.name && variables == o.variables && states == o.states &&
         transitions == o.transitions && events == o.events;
}

const StateDecl* MachineDecl::find_state(std::string_view state) const {
  const auto it = std::find_if(states.begin(), states.end(), [state](const StateDecl& s) { return s.name == state; });
  return it == states.end() ? nullptr : &*it;
}

const EventDecl* MachineDecl::find_event(std::string_view event) const {
  const auto it = std::find_if(events.begin(), events.end(), [event](const EventDecl& e) { return e.name == event; });
  return it == events.end() ? nullptr : &*it;
}

const MachineDecl* ProgramAST::find_machine(std::string_view machine) const {
  const auto it = std::find_if(machines.begin(), machines.end(),
                               [machine](const auto& m) { return m->name == machine; });
  return it == machines.end() ? nullptr : it->get();
}

bool ProgramAST::same_structure(const ProgramAST& o) const {
  return variables == o.variables && spawns == o.spawns &&
         std::equal(machines.begin(), machines.end(), o.machines.begin(), o.machines.end(), same_machine_ptr);
}

std::string format(const ParseFailure& f) {
  return std::to_string(f.line) + ":" + std::to_string(f.column) + ": " + f.message;
}

std::uint64_t content_digest(std::string_view text) noexcept {
  std::uint64_t h = 14695981039346656037ull;
  for (const unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

Expected<ProgramAST, ParseFailure> parse_program(std::string_view source) {
  Reader reader(source);
  auto forms = reader.read_all();
  if (!forms) return unexpected(std::move(forms).error());
  auto ast = FormBuilder(reader).program(forms.value());
  if (!ast) return ast;
  ast->source_hash = content_digest(source);
  ast->diagnostics = validate(ast.value());
  return ast;
}

Diagnostics validate(const ProgramAST& ast) {
  Diagnostics out;
  check_unique(ast.variables, [](const VariableDecl& v) { return std::pair{v.name, v.pos}; }, "variable", "", out);
  check_unique(ast.machines, [](const auto& m) { return std::pair{m->name, m->pos}; }, "machine", "", out);
  std::vector<const MachineDecl*> enclosing;
  for (const auto& m : ast.machines) validate_machine(*m, m->name, enclosing, out);
  for (const auto& s : ast.spawns) check_spawn(s, ast.find_machine(s.machine), "", out);
  return out;
}

std::string print_program(const ProgramAST& ast) {
  std::string out;
  for (const auto& v : ast.variables) {
    out += "(var " + v.name + " := ";
    print_block(v.init, out);
    out += ")\n";
  }
  for (const auto& m : ast.machines) {
    print_machine(*m, out, 0);
    out += '\n';
  }
  for (const auto& s : ast.spawns) out += "(spawn " + s.machine + " " + s.state + ")\n";
  return out;
}

}  // namespace lrp
