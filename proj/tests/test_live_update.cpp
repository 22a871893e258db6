#include <filesystem>
#include <random>
#include <fstream>

#include "doctest.h"
#include "fixtures.hpp"
#include "lrp/bridge.hpp"
#include "lrp/driver.hpp"
#include "lrp/live_update.hpp"

using namespace lrp;

namespace {

class Counter final : public HostObject {
 public:
  int calls = 0;
  bool flag = false;
  std::string_view class_name() const override { return "Counter"; }
  EvalResult send(std::string_view selector, std::span<const Value>) override {
    if (selector == "next") return Value(static_cast<double>(++calls));
    if (selector == "flag") return Value(flag);
    return Value();
  }
};

struct Live {
  HostRegistry hosts;
  std::shared_ptr<Counter> ctr = std::make_shared<Counter>();
  Interpreter interp{&hosts};

  explicit Live(std::string_view source) {
    hosts.add("ctr", ctr);
    auto ast = parse_program(source);
    REQUIRE(ast.has_value());
    interp.load(std::make_shared<const ProgramAST>(std::move(ast.value())));
  }

  const Value& var(std::string_view name, std::size_t instance = 0) const {
    const Value* v = interp.instances().at(instance)->env->lookup(name);
    REQUIRE(v != nullptr);
    return *v;
  }
  std::string active(std::size_t i = 0) const { return interp.instances().at(i)->active_path(); }
};

// Bus, simulated robot facing a wall 3 m ahead, and the bridge singleton.
struct RobotRig {
  bus::Bus bus;
  sim::Driver driver{bus, sim::World(std::vector<sim::Segment>{{{3, -5}, {3, 5}}}), sim::RobotState{}, 0.05};
  HostRegistry hosts;
  Interpreter interp{&hosts};

  explicit RobotRig(std::string_view source) {
    hosts.add_singleton("RobulabBridge", [this] { return std::make_shared<RobulabBridge>(bus); });
    interp.load(std::make_shared<const ProgramAST>(parse_program(source).value()));
    driver.publish_state();
  }
  TickReport tick() {
    auto r = interp.tick();
    driver.tick();
    return r;
  }
  std::string active() const { return interp.instances().at(0)->active_path(); }
};

std::string delete_nth_close_paren(std::string s, std::size_t n) {
  std::size_t pos = 0;
  for (std::size_t i = 0; i <= n; ++i) pos = s.find(')', i == 0 ? 0 : pos + 1);
  s.erase(pos, 1);
  return s;
}

}  // namespace

TEST_CASE("adding the avoidance states while stopped preserves stop and starts avoiding") {
  RobotRig rig(test::stop_program());
  for (int i = 0; i < 220; ++i) rig.tick();
  REQUIRE(rig.active() == "Tito/stop");
  const auto entered = rig.interp.instances()[0]->entered_at_tick;

  const auto out = apply_source(rig.interp, test::avoid_program());
  CHECK(out.kind == UpdateKind::integrated);
  CHECK(out.preserved_states == std::vector<std::string>{"Tito/stop"});
  CHECK(out.respawned.empty());
  CHECK(rig.active() == "Tito/stop");
  CHECK(rig.interp.instances()[0]->entered_at_tick == entered);

  const auto r = rig.tick();
  REQUIRE(r.transitions_taken.size() == 1);
  const auto& name = r.transitions_taken[0].name;
  CHECK((name == "t-lturn" || name == "t-rturn"));
}

TEST_CASE("a source with one parenthesis deleted is rejected and nothing changes") {
  RobotRig rig(test::stop_program());
  for (int i = 0; i < 220; ++i) rig.tick();
  const auto before_cfg = rig.interp.active_configuration();
  const auto before_program = rig.interp.program();

  const auto broken = delete_nth_close_paren(test::avoid_program(), 7);
  const auto out = apply_source(rig.interp, broken);
  CHECK(out.kind == UpdateKind::rejected_parse_error);
  REQUIRE(out.diagnostics.size() == 1);
  CHECK(out.diagnostics[0].line > 0);
  CHECK(rig.interp.program() == before_program);
  for (int i = 0; i < 100; ++i) {
    rig.tick();
    const auto cfg = rig.interp.active_configuration();
    REQUIRE(cfg.size() == before_cfg.size());
    REQUIRE(cfg[0].state == before_cfg[0].state);
    REQUIRE(cfg[0].variables == before_cfg[0].variables);
  }
}

TEST_CASE("removing the active state respawns at the spawn directive") {
  Live live(R"(
(machine M (state go) (state stop) (eps go -> stop halt))
(spawn M go))");
  live.interp.tick();
  REQUIRE(live.active() == "M/stop");
  const auto out = apply_source(live.interp, R"(
(machine M (state go))
(spawn M go))");
  CHECK(out.kind == UpdateKind::integrated_with_respawn);
  CHECK(out.respawned == std::vector<std::string>{"M"});
  CHECK(live.active() == "M/go");
  CHECK(live.interp.instances()[0]->entry_pending);
}

TEST_CASE("when the spawn state is gone too the machine idles, and recovers later") {
  Live live(R"(
(machine M (state a) (state b) (eps a -> b t))
(spawn M a))");
  live.interp.tick();
  auto out = apply_source(live.interp, R"(
(machine M (state c))
(spawn M a))");
  CHECK(out.kind == UpdateKind::machine_idled);
  CHECK(out.idled == std::vector<std::string>{"M"});
  CHECK(live.interp.instances()[0]->status == MachineStatus::idle_error);
  live.interp.tick();  // still ticking

  out = apply_source(live.interp, R"(
(machine M (state c))
(spawn M c))");
  CHECK(out.kind == UpdateKind::integrated_with_respawn);
  CHECK(live.active() == "M/c");
  CHECK(live.interp.instances()[0]->status == MachineStatus::running);
}

TEST_CASE("identity update preserves every active path and respawns nothing") {
  const std::string src = R"(
(var v := [ctr next])
(machine Outer
  (state s (machine Inner (state x) (state y)) (spawn Inner x))
  (state t))
(machine Other (state only))
(spawn Outer s)
(spawn Other only))";
  Live live(src);
  live.interp.tick();
  const auto out = apply_source(live.interp, src);
  CHECK(out.kind == UpdateKind::integrated);
  CHECK(out.respawned.empty());
  CHECK(out.preserved_states == std::vector<std::string>{"Outer/s", "Outer/s/Inner/x", "Other/only"});
  CHECK(live.ctr->calls == 1);
}

TEST_CASE("variables keep values unless their initializer text changed") {
  Live live(R"(
(var a := [ctr next])
(var b := [ctr next])
(var gone := [1])
(machine M (var m := [ctr next]) (state s))
(spawn M s))");
  CHECK(live.var("a") == Value(1.0));
  CHECK(live.var("b") == Value(2.0));
  CHECK(live.var("m") == Value(3.0));

  const auto out = apply_source(live.interp, R"(
(var a :=   [ ctr  next ])
(var b := [ctr next abs])
(var fresh := [ctr next])
(machine M (var m := [ctr next]) (state s))
(spawn M s))");
  CHECK(out.kind == UpdateKind::integrated);
  CHECK(live.var("a") == Value(1.0));      // same text modulo layout
  CHECK(live.var("b") == Value(4.0));      // re-initialized
  CHECK(live.var("fresh") == Value(5.0));  // new
  CHECK(live.var("m") == Value(3.0));
  CHECK(live.interp.root_frame().find_local("gone") == nullptr);
}

TEST_CASE("timers survive integration when the active state persists") {
  const std::string base = R"(
(machine M (state a) (state b) (ontime 500 a -> b t))
(spawn M a))";
  Live live(base);
  for (int i = 0; i < 6; ++i) live.interp.tick();
  apply_source(live.interp, R"(
(machine M (state a) (state b) (state c) (ontime 500 a -> b t))
(spawn M a))");
  std::int64_t fired = 0;
  for (int i = 0; i < 10 && fired == 0; ++i) {
    if (!live.interp.tick().transitions_taken.empty()) fired = live.interp.now();
  }
  CHECK(fired == 10);
}

TEST_CASE("new events and transitions are eligible from the next tick") {
  Live live(R"(
(machine M (state a) (state b))
(spawn M a))");
  live.ctr->flag = true;
  live.interp.tick();
  apply_source(live.interp, R"(
(machine M (state a) (state b) (on e a -> b added) (event e [ctr flag]))
(spawn M a))");
  const auto r = live.interp.tick();
  REQUIRE(r.transitions_taken.size() == 1);
  CHECK(r.transitions_taken[0].name == "added");
}

TEST_CASE("nested machine removed from the active state is discarded") {
  Live live(R"(
(machine Outer (state s (machine Inner (state x)) (spawn Inner x)))
(spawn Outer s))");
  live.interp.tick();
  REQUIRE(live.interp.instances()[0]->nested);
  const auto out = apply_source(live.interp, R"(
(machine Outer (state s))
(spawn Outer s))");
  CHECK(out.kind == UpdateKind::integrated);
  CHECK(live.interp.instances()[0]->nested == nullptr);
  CHECK(live.active() == "Outer/s");
}

TEST_CASE("a nested machine added to the active state is spawned") {
  Live live(R"(
(machine Outer (state s))
(spawn Outer s))");
  live.interp.tick();
  apply_source(live.interp, R"(
(machine Outer (state s (machine Inner (state x)) (spawn Inner x)))
(spawn Outer s))");
  CHECK(live.active() == "Outer/s/Inner/x");
}

TEST_CASE("new spawn directives start new machines; dropped ones leave machines running") {
  Live live(R"(
(machine A (state a))
(spawn A a))");
  live.interp.tick();
  apply_source(live.interp, R"(
(machine A (state a))
(machine B (state b))
(spawn B b))");
  REQUIRE(live.interp.instances().size() == 2);
  CHECK(live.active(0) == "A/a");
  CHECK(live.active(1) == "B/b");
}

TEST_CASE("random edit sequences never stop the interpreter") {
  // Alternate valid and corrupted versions of the avoidance program.
  RobotRig rig(test::stop_program());
  const std::string good = test::avoid_program();
  std::mt19937 rng(5);
  for (int round = 0; round < 60; ++round) {
    std::string src = round % 2 == 0 ? test::stop_program() : good;
    if (rng() % 3 == 0) src.erase(rng() % src.size(), 1 + rng() % 5);
    const auto before = rig.interp.now();
    apply_source(rig.interp, src);
    for (int i = 0; i < 5; ++i) rig.tick();
    REQUIRE(rig.interp.now() == before + 5);
  }
}

TEST_CASE("file watcher: digest, debounce and unreadable files") {
  const auto dir = std::filesystem::temp_directory_path() / "lrp_watch_test";
  std::filesystem::create_directories(dir);
  const auto path = (dir / "prog.lrp").string();
  auto write = [&](const std::string& text) {
    std::ofstream out(path, std::ios::trunc);
    out << text;
  };
  write("one");
  FileWatcher w(path);
  w.prime();

  CHECK_FALSE(w.poll(0));
  write("one");  // same bytes
  CHECK_FALSE(w.poll(50));
  CHECK_FALSE(w.poll(500));

  write("two");
  CHECK_FALSE(w.poll(1000));
  write("three");  // second write inside the window
  CHECK_FALSE(w.poll(1050));
  CHECK_FALSE(w.poll(1100));
  const auto change = w.poll(1150);
  REQUIRE(change);
  CHECK(change->contents == "three");
  CHECK_FALSE(w.poll(1300));
  CHECK_FALSE(w.poll(2000));

  std::filesystem::remove(path);
  CHECK_FALSE(w.poll(3000));
  CHECK_FALSE(w.poll(3100));
  const auto diags = w.take_diagnostics();
  REQUIRE(diags.size() == 1);
  CHECK(diags[0].code == "watch-unreadable");
  write("four");
  CHECK_FALSE(w.poll(3200));
  CHECK(w.poll(3300));
  std::filesystem::remove_all(dir);
}
