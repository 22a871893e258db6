#pragma once

// Always-running execution of LRP programs.
//
// Each tick walks the spawned machines outermost first. For the active state
// the outgoing transitions are tried in declaration order and the first
// eligible one is taken (onexit, transition action, onentry). After a
// transition, epsilon transitions keep firing within the same tick up to the
// chain cap. If nothing was eligible the state's `running` block runs and the
// nested machine, if any, gets its turn.
//
// Errors in blocks never stop the interpreter: a failing guard counts as false,
// a failing action is skipped, and both are reported as diagnostics.

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "lrp/diagnostic.hpp"
#include "lrp/eval.hpp"
#include "lrp/syntax.hpp"

namespace lrp {

enum class MachineStatus { running, idle_error };

struct MachineInstance {
  std::vector<std::string> decl_path;  // {"Tito"} or {"Tito", "state", "Inner"}
  const MachineDecl* decl = nullptr;
  std::optional<std::string> active_state;
  std::int64_t entered_at_tick = 0;
  bool entry_pending = false;  // onentry runs at the start of the next tick
  std::shared_ptr<Frame> env;
  std::unique_ptr<MachineInstance> nested;
  MachineInstance* parent = nullptr;
  MachineStatus status = MachineStatus::running;

  std::string path() const;
  /// Full state identity: machine/state[/machine/state...] down to the deepest active state.
  std::string active_path() const;
};

struct TransitionRecord {
  std::string machine;  // machine path
  std::string name;
  std::string source;
  std::string target;
};

struct TickReport {
  std::int64_t tick = 0;
  std::vector<TransitionRecord> transitions_taken;
  Diagnostics diagnostics;
  bool eps_chain_truncated = false;
};

struct ActiveEntry {
  std::string machine;
  std::string state;
  std::vector<std::pair<std::string, Value>> variables;
};

enum class UpdateKind { integrated, integrated_with_respawn, rejected_parse_error, machine_idled };
std::string_view to_string(UpdateKind k) noexcept;

struct UpdateOutcome {
  UpdateKind kind = UpdateKind::integrated;
  std::vector<std::string> preserved_states;  // active paths kept across the update
  std::vector<std::string> respawned;         // machine paths restarted
  std::vector<std::string> idled;             // machine paths left without a state
  Diagnostics diagnostics;
};

struct InterpreterOptions {
  std::int64_t tick_ms = 50;
  int eps_chain_cap = 100;
};

class Interpreter {
 public:
  struct Hooks {
    std::function<void(const TransitionRecord&)> on_transition;
    std::function<void(const Diagnostic&)> on_diagnostic;
  };

  explicit Interpreter(const HostRegistry* hosts, InterpreterOptions options = {});
  ~Interpreter();
  Interpreter(const Interpreter&) = delete;
  Interpreter& operator=(const Interpreter&) = delete;

  void set_hooks(Hooks hooks) { hooks_ = std::move(hooks); }

  /// Installs a program: evaluates root variables, then runs every spawn
  /// directive. Replaces whatever ran before without running exit actions.
  Diagnostics load(std::shared_ptr<const ProgramAST> program);

  /// Spawns one top-level machine. An unknown machine or state yields an
  /// instance with status idle_error.
  MachineInstance& spawn(std::string_view machine, std::string_view initial_state, Diagnostics& out);

  /// Advances the tick counter by one and runs every instance.
  TickReport tick();

  /// Hot swap to a new program, preserving active states where their full
  /// path still exists.
  UpdateOutcome integrate(std::shared_ptr<const ProgramAST> program);

  std::int64_t now() const noexcept { return now_; }
  const InterpreterOptions& options() const noexcept { return options_; }
  const std::shared_ptr<const ProgramAST>& program() const noexcept { return program_; }
  const std::vector<std::unique_ptr<MachineInstance>>& instances() const noexcept { return instances_; }
  const Frame& root_frame() const noexcept { return *root_; }

  /// Deepest-first (machine, state, visible variables) for one instance.
  static std::vector<ActiveEntry> active_configuration(const MachineInstance& instance);
  /// Concatenation over all instances in spawn order.
  std::vector<ActiveEntry> active_configuration() const;

 private:
  struct TickContext;

  Environment env_for(const MachineInstance& inst) const;
  void report(Diagnostic d, Diagnostics* sink);
  void init_variables(Frame& frame, const std::vector<VariableDecl>& vars, const std::string& where,
                      Diagnostics& out, const std::vector<VariableDecl>* previous_decls);
  std::unique_ptr<MachineInstance> make_instance(const MachineDecl* decl, std::vector<std::string> decl_path,
                                                 std::string_view initial_state, MachineInstance* parent,
                                                 std::shared_ptr<const Frame> parent_frame, Diagnostics& out);
  void run_block(const std::optional<ActionBlock>& block, const MachineInstance& inst, const char* what,
                 Diagnostics& out);
  void enter_state(MachineInstance& inst, Diagnostics& out);
  void exit_nested(MachineInstance& inst, Diagnostics& out);
  bool tick_instance(MachineInstance& inst, TickContext& ctx);
  bool eligible(MachineInstance& inst, const TransitionDecl& t, TickContext& ctx);
  void take(MachineInstance& inst, const TransitionDecl& t, TickContext& ctx);
  void integrate_instance(MachineInstance& inst, const MachineDecl* new_decl, const SpawnDirective* directive,
                          const std::shared_ptr<Frame>& parent_frame, UpdateOutcome& outcome);

  const HostRegistry* hosts_;
  InterpreterOptions options_;
  Hooks hooks_;
  std::shared_ptr<const ProgramAST> program_;
  std::shared_ptr<Frame> root_;
  std::vector<std::unique_ptr<MachineInstance>> instances_;
  std::int64_t now_ = 0;
  bool in_tick_ = false;
};

}  // namespace lrp
