#pragma once

// LRP program text.
//
//   program    := form*
//   form       := (var NAME := BLOCK) | machine | (spawn MACHINE STATE)
//   machine    := (machine NAME member*)
//   member     := (var ...) | (state NAME state-item*) | (event NAME BLOCK)
//               | (on EVENT SRC -> DST NAME [BLOCK])
//               | (ontime MILLIS SRC -> DST NAME [BLOCK])
//               | (eps SRC -> DST NAME [BLOCK])
//   state-item := (onentry BLOCK) | (running BLOCK) | (onexit BLOCK)
//               | machine | (spawn MACHINE STATE)
//
// BLOCK is `[ expr ]` in the action-expression language. `;` starts a comment
// that runs to the end of the line.

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "lrp/diagnostic.hpp"
#include "lrp/expected.hpp"
#include "lrp/expr.hpp"

namespace lrp {

struct SourcePos {
  int line = 0;
  int column = 0;
};

struct ActionBlock {
  std::string source_text;  // text between the brackets, as written
  ExprPtr expr;
  SourcePos pos;

  /// Canonical text of the expression; insensitive to spacing and comments.
  std::string canonical() const { return expr ? print_expr(*expr) : std::string(); }
  bool operator==(const ActionBlock& o) const { return same_expr(expr, o.expr); }
};

struct VariableDecl {
  std::string name;
  ActionBlock init;
  SourcePos pos;
  bool operator==(const VariableDecl& o) const { return name == o.name && init == o.init; }
};

struct EventDecl {
  std::string name;
  ActionBlock guard;
  SourcePos pos;
  bool operator==(const EventDecl& o) const { return name == o.name && guard == o.guard; }
};

enum class TransitionKind { event, timeout, epsilon };

struct TransitionDecl {
  TransitionKind kind = TransitionKind::event;
  std::string event;             // kind == event
  std::int64_t duration_ms = 0;  // kind == timeout
  std::string source;
  std::string target;
  std::string name;
  std::optional<ActionBlock> action;
  SourcePos pos;

  bool operator==(const TransitionDecl& o) const {
    return kind == o.kind && event == o.event && duration_ms == o.duration_ms &&
           source == o.source && target == o.target && name == o.name && action == o.action;
  }
};

struct SpawnDirective {
  std::string machine;
  std::string state;
  SourcePos pos;
  bool operator==(const SpawnDirective& o) const {
    return machine == o.machine && state == o.state;
  }
};

struct MachineDecl;

struct StateDecl {
  std::string name;
  std::optional<ActionBlock> onentry;
  std::optional<ActionBlock> running;
  std::optional<ActionBlock> onexit;
  std::shared_ptr<const MachineDecl> nested;
  std::optional<SpawnDirective> nested_spawn;
  SourcePos pos;

  bool operator==(const StateDecl& o) const;
};

struct MachineDecl {
  std::string name;
  std::vector<VariableDecl> variables;
  std::vector<StateDecl> states;
  std::vector<TransitionDecl> transitions;
  std::vector<EventDecl> events;
  SourcePos pos;

  const StateDecl* find_state(std::string_view state) const;
  const EventDecl* find_event(std::string_view event) const;
  bool operator==(const MachineDecl& o) const;
};

struct ProgramAST {
  std::vector<VariableDecl> variables;
  std::vector<std::shared_ptr<const MachineDecl>> machines;
  std::vector<SpawnDirective> spawns;
  std::uint64_t source_hash = 0;
  /// Validation findings; they never prevent the program from loading.
  Diagnostics diagnostics;

  const MachineDecl* find_machine(std::string_view machine) const;

  /// Structural equality; ignores positions, hash, and diagnostics.
  bool same_structure(const ProgramAST& o) const;
};

struct ParseFailure {
  int line = 0;
  int column = 0;
  std::string message;
};

std::string format(const ParseFailure& f);

/// FNV-1a over the raw bytes.
std::uint64_t content_digest(std::string_view text) noexcept;

/// Total: every input yields either an AST (with validation diagnostics
/// attached) or a ParseFailure.
Expected<ProgramAST, ParseFailure> parse_program(std::string_view source);

/// Name resolution and uniqueness checks.
Diagnostics validate(const ProgramAST& ast);

/// Canonical source text of a program.
std::string print_program(const ProgramAST& ast);

}  // namespace lrp
