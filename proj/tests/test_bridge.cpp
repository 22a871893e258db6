#include "doctest.h"
#include "lrp/bridge.hpp"
#include "lrp/driver.hpp"

using namespace lrp;

namespace {

struct Rig {
  bus::Bus bus;
  RobulabBridge bridge{bus};
  bus::NodeId sensor = bus.create_node("sensor");
  std::vector<msg::CmdVel> commands;
  std::vector<Diagnostic> diags;

  Rig() {
    bus.start(sensor);
    bus.subscribe(sensor, msg::kCommandVelocityTopic,
                  [this](const bus::Message& m) { commands.push_back(*msg::cmd_vel_from(m.payload)); });
    bridge.set_diagnostic_sink([this](const Diagnostic& d) { diags.push_back(d); });
  }

  // All beams at `far` except beam k at `near`.
  void publish_scan(std::size_t k, double near, double far = 10.0) {
    msg::LaserScan s{sim::kAngleMin, sim::kAngleIncrement, sim::kRangeMax, std::vector<double>(sim::kBeamCount, far)};
    s.ranges[k] = near;
    bus.publish(sensor, msg::kLaserTopic, msg::to_payload(s));
  }

  EvalResult send(std::string_view selector, std::vector<Value> args = {}) { return bridge.send(selector, args); }
};

constexpr std::size_t kZero = 135;  // beam index of 0 degrees

}  // namespace

TEST_CASE("motion selectors publish one command each") {
  Rig rig;
  CHECK(rig.send("forward:", {0.25}));
  CHECK(rig.send("turn:", {-0.5}));
  CHECK(rig.send("stop"));
  REQUIRE(rig.commands.size() == 3);
  CHECK(rig.commands[0] == msg::CmdVel{0.25, 0.0});
  CHECK(rig.commands[1] == msg::CmdVel{0.0, -0.5});
  CHECK(rig.commands[2] == msg::CmdVel{0.0, 0.0});
  CHECK(rig.bridge.command_count() == 3);
}

TEST_CASE("selector errors") {
  Rig rig;
  CHECK(rig.send("fly").error().kind == EvalErrorKind::unknown_selector);
  CHECK(rig.send("forward:", {true}).error().kind == EvalErrorKind::type_mismatch);
  CHECK(rig.commands.empty());
}

TEST_CASE("predicates answer false with a single diagnostic before any scan") {
  Rig rig;
  for (int i = 0; i < 3; ++i) CHECK(rig.send("isThereAnObstacle:", {0.5}).value() == Value(false));
  REQUIRE(rig.diags.size() == 1);
  CHECK(rig.diags[0].code == "no-scan");
}

TEST_CASE("sector membership") {
  using S = RobulabBridge::Sector;
  const double d = sim::kDegree;
  CHECK(RobulabBridge::in_sector(S::front, -45 * d));
  CHECK(RobulabBridge::in_sector(S::front, 45 * d));
  CHECK_FALSE(RobulabBridge::in_sector(S::front, 46 * d));
  CHECK(RobulabBridge::in_sector(S::front_right, -45 * d));
  CHECK(RobulabBridge::in_sector(S::front_right, -1 * d));
  CHECK_FALSE(RobulabBridge::in_sector(S::front_right, 0.0));
  CHECK(RobulabBridge::in_sector(S::front_left, 0.0));
  CHECK(RobulabBridge::in_sector(S::front_left, 45 * d));
  CHECK_FALSE(RobulabBridge::in_sector(S::front_left, -1 * d));
}

TEST_CASE("predicates use the latest scan and the inclusive threshold") {
  Rig rig;
  struct Row {
    std::size_t beam;
    double range;
    bool front, right, left;
  };
  const Row rows[] = {
      {kZero, 0.5, true, false, true},         {kZero - 1, 0.4, true, true, false},
      {kZero + 45, 0.4, true, false, true},    {kZero - 45, 0.4, true, true, false},
      {kZero + 46, 0.1, false, false, false},  {kZero - 46, 0.1, false, false, false},
      {kZero, 0.5000001, false, false, false}, {0, 0.01, false, false, false},
  };
  for (const auto& r : rows) {
    CAPTURE(r.beam);
    CAPTURE(r.range);
    rig.publish_scan(r.beam, r.range);
    CHECK(rig.send("isThereAnObstacle:", {0.5}).value() == Value(r.front));
    CHECK(rig.send("isThereARightObstacle:", {0.5}).value() == Value(r.right));
    CHECK(rig.send("isThereALeftObstacle:", {0.5}).value() == Value(r.left));
  }
  CHECK(rig.commands.empty());  // predicates never publish
}

TEST_CASE("commands while the bridge node is stopped are dropped with a diagnostic") {
  Rig rig;
  rig.bus.stop(rig.bridge.node());
  CHECK(rig.send("forward:", {1.0}));
  CHECK(rig.commands.empty());
  REQUIRE(rig.diags.size() == 1);
  CHECK(rig.diags[0].code == "bridge-stopped");
  rig.bus.start(rig.bridge.node());
  rig.send("stop");
  CHECK(rig.commands.size() == 1);
}

TEST_CASE("bridge drives the simulated robot") {
  bus::Bus bus;
  sim::Driver driver(bus, sim::World(std::vector<sim::Segment>{{{3, -5}, {3, 5}}}), sim::RobotState{}, 0.05);
  RobulabBridge bridge(bus);
  driver.publish_state();
  REQUIRE(bridge.latest_scan());
  CHECK(bridge.latest_scan()->ranges[kZero] == doctest::Approx(3.0));
  bridge.forward(0.25);
  for (int i = 0; i < 200; ++i) driver.tick();
  CHECK(bridge.latest_pose()->x == doctest::Approx(2.5));
  CHECK(bridge.sector_obstacle(RobulabBridge::Sector::front, 0.5));
}
