#include <stdexcept>

#include "doctest.h"
#include "lrp/interpreter.hpp"

using namespace lrp;

namespace {

// Records every message; `value` answers a settable Boolean, `boom` throws,
// `num` answers 7.
class Probe final : public HostObject {
 public:
  std::vector<std::string> log;
  bool flag = false;
  int value_sends = 0;

  std::string_view class_name() const override { return "Probe"; }
  EvalResult send(std::string_view selector, std::span<const Value> args) override {
    std::string entry(selector);
    for (const auto& a : args) entry += " " + describe(a);
    log.push_back(entry);
    if (selector == "value") {
      ++value_sends;
      return Value(flag);
    }
    if (selector == "boom") throw std::runtime_error("sensor unplugged");
    if (selector == "num") return Value(7.0);
    return Value();
  }
};

struct Harness {
  HostRegistry hosts;
  std::shared_ptr<Probe> rec = std::make_shared<Probe>();
  std::shared_ptr<Probe> other = std::make_shared<Probe>();
  std::unique_ptr<Interpreter> interp;
  std::vector<Diagnostic> hooked;

  explicit Harness(std::string_view source, InterpreterOptions opts = {}) {
    hosts.add("rec", rec);
    hosts.add("other", other);
    interp = std::make_unique<Interpreter>(&hosts, opts);
    interp->set_hooks({nullptr, [this](const Diagnostic& d) { hooked.push_back(d); }});
    auto ast = parse_program(source);
    REQUIRE_MESSAGE(ast.has_value(), (ast ? "" : format(ast.error())));
    load_diags = interp->load(std::make_shared<const ProgramAST>(std::move(ast.value())));
  }

  std::string active() const { return interp->instances().at(0)->active_path(); }
  Diagnostics load_diags;
};

std::vector<std::string> names(const TickReport& r) {
  std::vector<std::string> out;
  for (const auto& t : r.transitions_taken) out.push_back(t.name);
  return out;
}

}  // namespace

TEST_CASE("onentry is deferred to the first tick and actions run exactly once in order") {
  Harness h(R"(
(machine M
  (state a (onentry [rec log: 1]) (running [rec log: 9]) (onexit [rec log: 2]))
  (state b (onentry [rec log: 4]))
  (on go a -> b t1 [rec log: 3])
  (event go [other value]))
(spawn M a))");
  CHECK(h.rec->log.empty());
  CHECK(h.active() == "M/a");

  auto r = h.interp->tick();
  CHECK(r.transitions_taken.empty());
  CHECK(h.rec->log == std::vector<std::string>{"log: 1", "log: 9"});

  h.other->flag = true;
  r = h.interp->tick();
  CHECK(names(r) == std::vector<std::string>{"t1"});
  CHECK(h.rec->log == std::vector<std::string>{"log: 1", "log: 9", "log: 2", "log: 3", "log: 4"});
  CHECK(h.active() == "M/b");
  CHECK(r.tick == 2);
}

TEST_CASE("the first eligible transition in declaration order wins") {
  Harness h(R"(
(machine M
  (state a) (state b) (state c)
  (on e1 a -> b first)
  (on e2 a -> c second)
  (event e1 [other value])
  (event e2 [other value]))
(spawn M a))");
  h.other->flag = true;
  CHECK(names(h.interp->tick()) == std::vector<std::string>{"first"});
}

TEST_CASE("a transition to a missing state is never eligible") {
  Harness h(R"(
(machine M
  (state a) (state b)
  (on e a -> nowhere broken)
  (on e a -> b fine)
  (event e [other value]))
(spawn M a))");
  CHECK_FALSE(h.load_diags.empty());  // unresolved target reported at load
  h.other->flag = true;
  CHECK(names(h.interp->tick()) == std::vector<std::string>{"fine"});
}

TEST_CASE("ontime fires once its duration has elapsed") {
  Harness h(R"(
(machine M (state a) (state b) (ontime 500 a -> b t))
(spawn M a))");
  std::int64_t fired = 0;
  for (int i = 0; i < 20 && fired == 0; ++i) {
    if (!h.interp->tick().transitions_taken.empty()) fired = h.interp->now();
  }
  CHECK(fired == 10);
}

TEST_CASE("ontime restarts its clock when the state is re-entered") {
  Harness h(R"(
(machine M (state a) (state b) (ontime 100 a -> b ab) (ontime 100 b -> a ba))
(spawn M a))");
  std::vector<std::int64_t> ticks;
  for (int i = 0; i < 8; ++i) {
    if (!h.interp->tick().transitions_taken.empty()) ticks.push_back(h.interp->now());
  }
  CHECK(ticks == std::vector<std::int64_t>{2, 4, 6, 8});
}

TEST_CASE("epsilon self-loop is truncated at the chain cap") {
  Harness h(R"(
(machine M (state a (onentry [rec log: 1])) (eps a -> a loop))
(spawn M a))");
  const auto r = h.interp->tick();
  CHECK(r.transitions_taken.size() == 100);
  CHECK(r.eps_chain_truncated);
  REQUIRE(h.hooked.size() == 1);
  CHECK(h.hooked[0].code == "eps-chain-truncated");
  CHECK(h.rec->log.size() == 101);  // deferred entry + one per transition
  CHECK(h.interp->tick().transitions_taken.size() == 100);  // and again next tick
}

TEST_CASE("epsilon transitions chain after an event transition within the tick") {
  Harness h(R"(
(machine M
  (state a) (state b) (state c) (state d)
  (on go a -> b t1)
  (eps b -> c t2)
  (eps c -> d t3)
  (event go [other value]))
(spawn M a))");
  h.other->flag = true;
  const auto r = h.interp->tick();
  CHECK(names(r) == std::vector<std::string>{"t1", "t2", "t3"});
  CHECK_FALSE(r.eps_chain_truncated);
}

TEST_CASE("running does not execute on a tick that took a transition") {
  Harness h(R"(
(machine M
  (state a (running [rec log: 1]))
  (state b (running [rec log: 2]))
  (on go a -> b t)
  (event go [other value]))
(spawn M a))");
  h.other->flag = true;
  h.interp->tick();
  CHECK(h.rec->log.empty());
  h.interp->tick();
  CHECK(h.rec->log == std::vector<std::string>{"log: 2"});
}

TEST_CASE("a guard that throws every tick never stops the interpreter") {
  Harness h(R"(
(machine M
  (state a (running [rec log: 1]))
  (state b)
  (on bad a -> b t)
  (event bad [rec boom]))
(spawn M a))");
  std::size_t diags = 0;
  for (int i = 0; i < 1000; ++i) diags += h.interp->tick().diagnostics.size();
  CHECK(h.interp->now() == 1000);
  CHECK(h.active() == "M/a");
  CHECK(diags == 1000);  // one per failing guard per tick
  CHECK(h.rec->log.size() == 2000);  // boom + running each tick
  CHECK(h.hooked.front().code == "guard-error");
  CHECK(h.hooked.front().message.find("sensor unplugged") != std::string::npos);
}

TEST_CASE("a guard is evaluated once per tick however many transitions use it") {
  Harness h(R"(
(machine M
  (state a) (state b) (state c)
  (on e a -> b t1)
  (on e a -> c t2)
  (event e [other value]))
(spawn M a))");
  h.interp->tick();
  CHECK(h.other->value_sends == 1);
}

TEST_CASE("non-Boolean guards count as false with a diagnostic") {
  Harness h(R"(
(machine M (state a) (state b) (on e a -> b t) (event e [rec num]))
(spawn M a))");
  const auto r = h.interp->tick();
  CHECK(r.transitions_taken.empty());
  REQUIRE(r.diagnostics.size() == 1);
  CHECK(r.diagnostics[0].message.find("not a Boolean") != std::string::npos);
}

TEST_CASE("failing actions are skipped and reported") {
  Harness h(R"(
(machine M (state a (onentry [rec boom])) (state b (onentry [missing frob])) (eps a -> b t))
(spawn M a))");
  const auto r = h.interp->tick();
  CHECK(names(r) == std::vector<std::string>{"t"});
  REQUIRE(r.diagnostics.size() == 2);
  CHECK(r.diagnostics[0].code == "action-error");
  CHECK(r.diagnostics[1].message.find("missing") != std::string::npos);
}

TEST_CASE("variables: lexical scoping, failing initializers bind nil") {
  Harness h(R"(
(var speed := [2])
(var broken := [rec boom])
(machine M
  (var speed := [speed negated])
  (var own := [speed abs])
  (state a (onentry [rec log: own])))
(spawn M a))");
  REQUIRE(h.load_diags.size() == 1);
  CHECK(h.load_diags[0].code == "init-error");
  CHECK(h.interp->root_frame().find_local("broken")->is_nil());
  h.interp->tick();
  CHECK(h.rec->log.back() == "log: 2");
  const auto cfg = h.interp->active_configuration();
  REQUIRE(cfg.size() == 1);
  CHECK(cfg[0].machine == "M");
  CHECK(cfg[0].state == "a");
  const auto find = [&](const std::string& n) {
    for (const auto& [k, v] : cfg[0].variables)
      if (k == n) return v;
    return Value();
  };
  CHECK(find("speed") == Value(-2.0));
  CHECK(find("own") == Value(2.0));
}

TEST_CASE("spawn errors leave an idle instance and the rest running") {
  Harness h(R"(
(machine M (state a))
(spawn M nowhere)
(spawn Ghost a))");
  REQUIRE(h.interp->instances().size() == 2);
  CHECK(h.interp->instances()[0]->status == MachineStatus::idle_error);
  CHECK(h.interp->instances()[1]->status == MachineStatus::idle_error);
  bool saw_state = false, saw_machine = false;
  for (const auto& d : h.load_diags) {
    saw_state = saw_state || d.message.find("unknown state") != std::string::npos;
    saw_machine = saw_machine || d.message.find("unknown machine") != std::string::npos;
  }
  CHECK(saw_state);
  CHECK(saw_machine);
  h.interp->tick();
  CHECK(h.interp->active_configuration().empty());
}

TEST_CASE("duplicate top-level spawns are ignored") {
  Harness h(R"(
(machine M (state a) (state b))
(spawn M a)
(spawn M b))");
  CHECK(h.interp->instances().size() == 1);
  CHECK(h.active() == "M/a");
}

TEST_CASE("nested machines: outer first, inner runs while outer stays, exits deepest first") {
  Harness h(R"(
(var leave := [other value])
(machine Outer
  (state s
    (onentry [rec log: 1])
    (onexit [rec log: 2])
    (machine Inner
      (state x (onentry [rec log: 10]) (onexit [rec log: 11]))
      (state y (onentry [rec log: 12]) (onexit [rec log: 13]))
      (ontime 100 x -> y inner-step))
    (spawn Inner x))
  (state t (onentry [rec log: 3]))
  (on out s -> t outer-step)
  (event out [other value]))
(spawn Outer s))");
  h.interp->tick();  // outer entry enters the inner machine too
  CHECK(h.rec->log == std::vector<std::string>{"log: 1", "log: 10"});
  CHECK(h.active() == "Outer/s/Inner/x");

  std::vector<std::pair<std::int64_t, std::string>> taken;
  for (int i = 0; i < 4; ++i) {
    for (auto& n : names(h.interp->tick())) taken.emplace_back(h.interp->now(), n);
  }
  CHECK(taken == std::vector<std::pair<std::int64_t, std::string>>{{3, "inner-step"}});
  CHECK(h.active() == "Outer/s/Inner/y");

  const auto cfg = h.interp->active_configuration();
  REQUIRE(cfg.size() == 2);
  CHECK(cfg[0].machine == "Outer/s/Inner");  // deepest first
  CHECK(cfg[0].state == "y");
  CHECK(cfg[1].machine == "Outer");

  h.rec->log.clear();
  h.other->flag = true;
  CHECK(names(h.interp->tick()) == std::vector<std::string>{"outer-step"});
  CHECK(h.rec->log == std::vector<std::string>{"log: 13", "log: 2", "log: 3"});
  CHECK(h.active() == "Outer/t");
  CHECK(h.interp->instances()[0]->nested == nullptr);
}

TEST_CASE("inner guards see events declared by the enclosing machine") {
  Harness h(R"(
(machine Outer
  (state s
    (machine Inner (state x) (state y) (on go x -> y inner))
    (spawn Inner x))
  (event go [other value]))
(spawn Outer s))");
  CHECK(h.load_diags.empty());
  h.interp->tick();
  h.other->flag = true;
  CHECK(names(h.interp->tick()) == std::vector<std::string>{"inner"});
}

TEST_CASE("diagnostic hook fires only during ticks") {
  Harness h(R"(
(var x := [rec boom])
(machine M (state a (running [rec boom])))
(spawn M a))");
  CHECK(h.hooked.empty());
  CHECK(h.load_diags.size() == 1);
  h.interp->tick();
  CHECK(h.hooked.size() == 1);
}
