#include "lrp/interpreter.hpp"

#include <algorithm>
#include <map>
#include <utility>

namespace lrp {

namespace {

std::string join(const std::vector<std::string>& parts) {
  std::string out;
  for (const auto& p : parts) {
    if (!out.empty()) out += '/';
    out += p;
  }
  return out;
}

const VariableDecl* find_var(const std::vector<VariableDecl>* decls, std::string_view name) {
  if (decls == nullptr) return nullptr;
  const auto it = std::find_if(decls->begin(), decls->end(), [name](const VariableDecl& v) { return v.name == name; });
  return it == decls->end() ? nullptr : &*it;
}

}  // namespace

std::string MachineInstance::path() const { return join(decl_path); }

std::string MachineInstance::active_path() const {
  if (nested && nested->active_state) return nested->active_path();
  return active_state ? path() + "/" + *active_state : path();
}

std::string_view to_string(UpdateKind k) noexcept {
  switch (k) {
    case UpdateKind::integrated:
      return "integrated";
    case UpdateKind::integrated_with_respawn:
      return "integrated_with_respawn";
    case UpdateKind::rejected_parse_error:
      return "rejected_parse_error";
    case UpdateKind::machine_idled:
      return "machine_idled";
  }
  return "integrated";
}

struct Interpreter::TickContext {
  TickReport& report;
  // One evaluation per (event, scope) per tick, so each failing guard is
  // reported once per tick.
  std::map<std::pair<const EventDecl*, const Frame*>, bool> guards;
};

Interpreter::Interpreter(const HostRegistry* hosts, InterpreterOptions options)
    : hosts_(hosts), options_(options), program_(std::make_shared<const ProgramAST>()),
      root_(std::make_shared<Frame>()) {}

Interpreter::~Interpreter() = default;

Environment Interpreter::env_for(const MachineInstance& inst) const { return Environment{inst.env.get(), hosts_}; }

void Interpreter::report(Diagnostic d, Diagnostics* sink) {
  if (in_tick_ && hooks_.on_diagnostic) hooks_.on_diagnostic(d);
  if (sink != nullptr) sink->push_back(std::move(d));
}

void Interpreter::init_variables(Frame& frame, const std::vector<VariableDecl>& vars, const std::string& where,
                                 Diagnostics& out, const std::vector<VariableDecl>* previous_decls) {
  const auto previous = frame.bindings();
  frame.clear();
  for (const auto& v : vars) {
    // Unchanged initializer text keeps the current value.
    const VariableDecl* before = find_var(previous_decls, v.name);
    if (before != nullptr && before->init.canonical() == v.init.canonical()) {
      const auto kept = std::find_if(previous.begin(), previous.end(), [&v](const auto& b) { return b.first == v.name; });
      if (kept != previous.end()) {
        frame.set(v.name, kept->second);
        continue;
      }
    }
    auto value = v.init.expr ? eval(*v.init.expr, Environment{&frame, hosts_}) : EvalResult(Value());
    if (!value) {
      report(Diagnostic{Severity::error, "init-error",
                        "initializer of " + v.name + " failed (" + std::string(to_string(value.error().kind)) +
                            "): " + value.error().message + "; bound to nil",
                        where, v.pos.line, v.pos.column},
             &out);
      frame.set(v.name, Value());
    } else {
      frame.set(v.name, std::move(value.value()));
    }
  }
}

std::unique_ptr<MachineInstance> Interpreter::make_instance(const MachineDecl* decl, std::vector<std::string> decl_path,
                                                            std::string_view initial_state, MachineInstance* parent,
                                                            std::shared_ptr<const Frame> parent_frame,
                                                            Diagnostics& out) {
  auto inst = std::make_unique<MachineInstance>();
  inst->decl_path = std::move(decl_path);
  inst->decl = decl;
  inst->parent = parent;
  inst->env = std::make_shared<Frame>(std::move(parent_frame));
  inst->entered_at_tick = now_;
  const std::string where = inst->path();
  if (decl == nullptr) {
    inst->status = MachineStatus::idle_error;
    report(Diagnostic{Severity::error, "unknown-machine", "cannot spawn unknown machine " + where, where, 0, 0}, &out);
    return inst;
  }
  init_variables(*inst->env, decl->variables, where, out, nullptr);
  if (decl->find_state(initial_state) == nullptr) {
    inst->status = MachineStatus::idle_error;
    report(Diagnostic{Severity::error, "unknown-state",
                      "cannot spawn " + where + ": unknown state " + std::string(initial_state), where, 0, 0},
           &out);
    return inst;
  }
  inst->active_state = std::string(initial_state);
  inst->entry_pending = true;
  return inst;
}

Diagnostics Interpreter::load(std::shared_ptr<const ProgramAST> program) {
  Diagnostics out = program->diagnostics;
  instances_.clear();
  program_ = std::move(program);
  root_ = std::make_shared<Frame>();
  init_variables(*root_, program_->variables, "", out, nullptr);
  for (const auto& s : program_->spawns) spawn(s.machine, s.state, out);
  return out;
}

MachineInstance& Interpreter::spawn(std::string_view machine, std::string_view initial_state, Diagnostics& out) {
  const auto existing = std::find_if(instances_.begin(), instances_.end(),
                                     [machine](const auto& i) { return i->decl_path.front() == machine; });
  if (existing != instances_.end()) {
    report(Diagnostic{Severity::warning, "duplicate-spawn",
                      "machine " + std::string(machine) + " is already spawned; directive ignored", std::string(machine),
                      0, 0},
           &out);
    return **existing;
  }
  instances_.push_back(make_instance(program_->find_machine(machine), {std::string(machine)}, initial_state, nullptr,
                                     root_, out));
  return *instances_.back();
}

void Interpreter::run_block(const std::optional<ActionBlock>& block, const MachineInstance& inst, const char* what,
                            Diagnostics& out) {
  if (!block || !block->expr) return;
  auto result = eval(*block->expr, env_for(inst));
  if (!result) {
    report(Diagnostic{Severity::error, "action-error",
                      std::string(what) + " block [" + block->canonical() + "] failed (" +
                          std::string(to_string(result.error().kind)) + "): " + result.error().message,
                      inst.path(), block->pos.line, block->pos.column},
           &out);
  }
}

void Interpreter::enter_state(MachineInstance& inst, Diagnostics& out) {
  const StateDecl* state = inst.decl->find_state(*inst.active_state);
  if (state == nullptr) return;
  run_block(state->onentry, inst, "onentry", out);
  if (state->nested && state->nested_spawn && state->nested_spawn->machine == state->nested->name) {
    auto path = inst.decl_path;
    path.push_back(state->name);
    path.push_back(state->nested->name);
    inst.nested = make_instance(state->nested.get(), std::move(path), state->nested_spawn->state, &inst, inst.env, out);
    // Entering a state enters its nested machine as well.
    if (inst.nested->status == MachineStatus::running) {
      inst.nested->entry_pending = false;
      enter_state(*inst.nested, out);
    }
  }
}

void Interpreter::exit_nested(MachineInstance& inst, Diagnostics& out) {
  if (!inst.nested) return;
  MachineInstance& child = *inst.nested;
  exit_nested(child, out);
  if (child.status == MachineStatus::running && child.active_state && !child.entry_pending) {
    if (const StateDecl* s = child.decl->find_state(*child.active_state)) run_block(s->onexit, child, "onexit", out);
  }
  inst.nested.reset();
}

bool Interpreter::eligible(MachineInstance& inst, const TransitionDecl& t, TickContext& ctx) {
  if (t.source != *inst.active_state || inst.decl->find_state(t.target) == nullptr) return false;
  switch (t.kind) {
    case TransitionKind::epsilon:
      return true;
    case TransitionKind::timeout:
      return t.duration_ms > 0 && (now_ - inst.entered_at_tick) * options_.tick_ms >= t.duration_ms;
    case TransitionKind::event:
      break;
  }
  // Guards are evaluated in the scope of the machine that declares the event.
  MachineInstance* scope = &inst;
  const EventDecl* event = nullptr;
  for (; scope != nullptr; scope = scope->parent) {
    if ((event = scope->decl->find_event(t.event)) != nullptr) break;
  }
  if (event == nullptr || !event->guard.expr) return false;
  const auto key = std::make_pair(event, static_cast<const Frame*>(scope->env.get()));
  if (const auto cached = ctx.guards.find(key); cached != ctx.guards.end()) return cached->second;

  bool fired = false;
  auto result = eval(*event->guard.expr, env_for(*scope));
  if (!result) {
    report(Diagnostic{Severity::error, "guard-error",
                      "guard of event " + event->name + " failed (" + std::string(to_string(result.error().kind)) +
                          "): " + result.error().message,
                      scope->path(), event->pos.line, event->pos.column},
           &ctx.report.diagnostics);
  } else if (!result->is_bool()) {
    report(Diagnostic{Severity::error, "guard-error",
                      "guard of event " + event->name + " answered " + describe(*result) + ", not a Boolean",
                      scope->path(), event->pos.line, event->pos.column},
           &ctx.report.diagnostics);
  } else {
    fired = result->boolean();
  }
  ctx.guards.emplace(key, fired);
  return fired;
}

void Interpreter::take(MachineInstance& inst, const TransitionDecl& t, TickContext& ctx) {
  Diagnostics& out = ctx.report.diagnostics;
  exit_nested(inst, out);
  if (const StateDecl* source = inst.decl->find_state(t.source)) run_block(source->onexit, inst, "onexit", out);
  run_block(t.action, inst, "transition", out);
  TransitionRecord record{inst.path(), t.name, t.source, t.target};
  if (hooks_.on_transition) hooks_.on_transition(record);
  ctx.report.transitions_taken.push_back(std::move(record));
  inst.active_state = t.target;
  inst.entered_at_tick = now_;
  enter_state(inst, out);
}

bool Interpreter::tick_instance(MachineInstance& inst, TickContext& ctx) {
  if (inst.status != MachineStatus::running || !inst.active_state || inst.decl == nullptr) return false;
  if (inst.entry_pending) {
    inst.entry_pending = false;
    enter_state(inst, ctx.report.diagnostics);
  }

  auto first_eligible = [&](bool epsilon_only) -> const TransitionDecl* {
    for (const auto& t : inst.decl->transitions) {
      if (epsilon_only && t.kind != TransitionKind::epsilon) continue;
      if (eligible(inst, t, ctx)) return &t;
    }
    return nullptr;
  };

  const TransitionDecl* first = first_eligible(false);
  if (first == nullptr) {
    if (const StateDecl* s = inst.decl->find_state(*inst.active_state)) {
      run_block(s->running, inst, "running", ctx.report.diagnostics);
    }
    if (inst.nested) tick_instance(*inst.nested, ctx);
    return false;
  }

  take(inst, *first, ctx);
  int chained = first->kind == TransitionKind::epsilon ? 1 : 0;
  while (const TransitionDecl* next = first_eligible(true)) {
    if (chained >= options_.eps_chain_cap) {
      ctx.report.eps_chain_truncated = true;
      report(Diagnostic{Severity::warning, "eps-chain-truncated",
                        "stopped after " + std::to_string(chained) + " chained epsilon transitions in one tick",
                        inst.path(), next->pos.line, next->pos.column},
             &ctx.report.diagnostics);
      break;
    }
    take(inst, *next, ctx);
    ++chained;
  }
  return true;
}

TickReport Interpreter::tick() {
  ++now_;
  TickReport report;
  report.tick = now_;
  TickContext ctx{report, {}};
  in_tick_ = true;
  for (auto& inst : instances_) tick_instance(*inst, ctx);
  in_tick_ = false;
  return report;
}

void Interpreter::integrate_instance(MachineInstance& inst, const MachineDecl* new_decl,
                                     const SpawnDirective* directive, const std::shared_ptr<Frame>& parent_frame,
                                     UpdateOutcome& outcome) {
  const std::string where = inst.path();
  Diagnostics& out = outcome.diagnostics;
  const MachineDecl* old_decl = inst.decl;

  if (new_decl != nullptr && inst.status == MachineStatus::running && inst.active_state &&
      new_decl->find_state(*inst.active_state) != nullptr) {
    inst.decl = new_decl;
    init_variables(*inst.env, new_decl->variables, where, out, old_decl ? &old_decl->variables : nullptr);
    outcome.preserved_states.push_back(where + "/" + *inst.active_state);
    const StateDecl* state = new_decl->find_state(*inst.active_state);
    const bool has_nested_spawn =
        state->nested && state->nested_spawn && state->nested_spawn->machine == state->nested->name;
    if (inst.nested) {
      if (has_nested_spawn && state->nested->name == inst.nested->decl_path.back()) {
        integrate_instance(*inst.nested, state->nested.get(), &*state->nested_spawn, inst.env, outcome);
      } else {
        report(Diagnostic{Severity::info, "nested-removed",
                          "nested machine " + inst.nested->path() + " is no longer declared; discarded", where, 0, 0},
               &out);
        inst.nested.reset();
      }
    } else if (has_nested_spawn && !inst.entry_pending) {
      auto path = inst.decl_path;
      path.push_back(state->name);
      path.push_back(state->nested->name);
      inst.nested = make_instance(state->nested.get(), std::move(path), state->nested_spawn->state, &inst, inst.env, out);
    }
    return;
  }

  // The active state is gone (or the machine was idle): restart from the
  // spawn directive if it still resolves, otherwise idle.
  if (new_decl != nullptr && directive != nullptr && new_decl->find_state(directive->state) != nullptr) {
    auto fresh = make_instance(new_decl, inst.decl_path, directive->state, inst.parent, parent_frame, out);
    inst = std::move(*fresh);
    outcome.respawned.push_back(where);
    report(Diagnostic{Severity::info, "respawned", where + " restarted at state " + directive->state, where, 0, 0},
           &out);
    return;
  }
  inst.nested.reset();
  inst.active_state.reset();
  inst.decl = new_decl;
  inst.status = MachineStatus::idle_error;
  outcome.idled.push_back(where);
  report(Diagnostic{Severity::error, "machine-idled",
                    new_decl == nullptr ? where + " is no longer declared; machine idles"
                                        : where + " has no valid spawn state; machine idles",
                    where, 0, 0},
         &out);
}

UpdateOutcome Interpreter::integrate(std::shared_ptr<const ProgramAST> program) {
  UpdateOutcome outcome;
  outcome.diagnostics = program->diagnostics;
  // Keeps the old declarations alive while instances are re-pointed.
  const auto old_program = std::exchange(program_, std::move(program));

  init_variables(*root_, program_->variables, "", outcome.diagnostics, &old_program->variables);
  for (auto& inst : instances_) {
    const std::string& name = inst->decl_path.front();
    const auto directive = std::find_if(program_->spawns.begin(), program_->spawns.end(),
                                        [&name](const SpawnDirective& s) { return s.machine == name; });
    integrate_instance(*inst, program_->find_machine(name),
                       directive == program_->spawns.end() ? nullptr : &*directive, root_, outcome);
  }
  for (const auto& s : program_->spawns) {
    const bool running = std::any_of(instances_.begin(), instances_.end(),
                                     [&s](const auto& i) { return i->decl_path.front() == s.machine; });
    if (!running) spawn(s.machine, s.state, outcome.diagnostics);
  }

  if (!outcome.idled.empty()) {
    outcome.kind = UpdateKind::machine_idled;
  } else if (!outcome.respawned.empty()) {
    outcome.kind = UpdateKind::integrated_with_respawn;
  } else {
    outcome.kind = UpdateKind::integrated;
  }
  return outcome;
}

std::vector<ActiveEntry> Interpreter::active_configuration(const MachineInstance& instance) {
  std::vector<ActiveEntry> out;
  if (instance.status != MachineStatus::running || !instance.active_state) return out;
  if (instance.nested) out = active_configuration(*instance.nested);
  out.push_back(ActiveEntry{instance.path(), *instance.active_state, instance.env->visible()});
  return out;
}

std::vector<ActiveEntry> Interpreter::active_configuration() const {
  std::vector<ActiveEntry> out;
  for (const auto& inst : instances_) {
    auto part = active_configuration(*inst);
    out.insert(out.end(), std::make_move_iterator(part.begin()), std::make_move_iterator(part.end()));
  }
  return out;
}

}  // namespace lrp
