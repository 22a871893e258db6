#pragma once

#include <functional>
#include <optional>
#include <string>

#include "lrp/diagnostic.hpp"
#include "lrp/eval.hpp"
#include "lrp/messages.hpp"
#include "lrp/pubsub.hpp"

namespace lrp {

/// Robot facade reachable from action blocks as `RobulabBridge uniqueInstance`.
///
///   forward: speed            publish {speed, 0} on /command_velocity
///   turn: speed               publish {0, speed}
///   stop                      publish {0, 0}
///   isThereAnObstacle: d      any front beam (-45..+45 deg) reads <= d
///   isThereARightObstacle: d  same over [-45, 0) deg
///   isThereALeftObstacle: d   same over [0, +45] deg
///
/// The predicates only read the latest scan and never publish.
class RobulabBridge final : public HostObject {
 public:
  enum class Sector { front, front_left, front_right };
  using DiagnosticSink = std::function<void(const Diagnostic&)>;

  explicit RobulabBridge(bus::Bus& bus, std::string node_name = "robulab_bridge");

  std::string_view class_name() const override { return "RobulabBridge"; }
  EvalResult send(std::string_view selector, std::span<const Value> args) override;

  void forward(double linear_speed);
  void turn(double angular_speed);
  void stop();
  bool sector_obstacle(Sector sector, double minimum_distance);

  void set_diagnostic_sink(DiagnosticSink sink) { sink_ = std::move(sink); }

  bus::NodeId node() const noexcept { return node_; }
  std::uint64_t command_count() const noexcept { return command_count_; }
  const std::optional<msg::LaserScan>& latest_scan() const noexcept { return latest_scan_; }
  const std::optional<msg::Pose2D>& latest_pose() const noexcept { return latest_pose_; }

  static bool in_sector(Sector sector, double relative_angle) noexcept;

 private:
  void command(double linear, double angular);
  void report(std::string code, std::string message);

  bus::Bus& bus_;
  bus::NodeId node_;
  std::optional<msg::LaserScan> latest_scan_;
  std::optional<msg::Pose2D> latest_pose_;
  std::uint64_t command_count_ = 0;
  bool warned_no_scan_ = false;
  DiagnosticSink sink_;
};

}  // namespace lrp
