#pragma once

#include <functional>
#include <optional>
#include <string>

#include "lrp/diagnostic.hpp"
#include "lrp/pubsub.hpp"
#include "lrp/sim.hpp"

namespace lrp::sim {

/// The robot's node: consumes /command_velocity, publishes /pose then /laser
/// once per simulation tick. The last command persists until replaced.
class Driver {
 public:
  using DiagnosticSink = std::function<void(const Diagnostic&)>;

  Driver(bus::Bus& bus, World world, RobotState initial, double dt, std::string name = "driver");
  Driver(const Driver&) = delete;
  Driver& operator=(const Driver&) = delete;

  void set_diagnostic_sink(DiagnosticSink sink) { sink_ = std::move(sink); }

  /// Apply the latest command, integrate one step, publish. Does nothing
  /// while the node is not running.
  void tick();

  /// Publish pose and laser for the current state without stepping.
  void publish_state();

  /// Restore the initial pose and clear the collision flag. The current
  /// command is kept.
  void reset();

  bus::NodeId node() const noexcept { return node_; }
  const RobotState& robot() const noexcept { return robot_; }
  const RobotState& initial() const noexcept { return initial_; }
  const World& world() const noexcept { return world_; }
  const msg::LaserScan& last_scan() const noexcept { return last_scan_; }
  double dt() const noexcept { return dt_; }

 private:
  bus::Bus& bus_;
  World world_;
  RobotState initial_;
  RobotState robot_;
  double dt_;
  bus::NodeId node_;
  msg::LaserScan last_scan_;
  DiagnosticSink sink_;
};

}  // namespace lrp::sim
