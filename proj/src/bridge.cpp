#include "lrp/bridge.hpp"

#include <numbers>

namespace lrp {

namespace {

constexpr double kQuarterPi = std::numbers::pi / 4.0;
constexpr double kAngleTolerance = 1e-9;

EvalResult number_arg(std::string_view selector, std::span<const Value> args) {
  if (args.size() != 1 || !args[0].is_number()) {
    return unexpected(EvalError{EvalErrorKind::type_mismatch,
                                "RobulabBridge#" + std::string(selector) + " expects a Number"});
  }
  return args[0];
}

}  // namespace

RobulabBridge::RobulabBridge(bus::Bus& bus, std::string node_name) : bus_(bus) {
  node_ = bus_.create_node(std::move(node_name));
  bus_.advertise(node_, msg::kCommandVelocityTopic);
  bus_.subscribe(node_, msg::kLaserTopic, [this](const bus::Message& m) {
    if (auto scan = msg::laser_from(m.payload)) latest_scan_ = std::move(*scan);
  });
  bus_.subscribe(node_, msg::kPoseTopic, [this](const bus::Message& m) {
    if (auto pose = msg::pose_from(m.payload)) latest_pose_ = *pose;
  });
  bus_.start(node_);
}

void RobulabBridge::report(std::string code, std::string message) {
  if (sink_) sink_(Diagnostic{Severity::warning, std::move(code), std::move(message), bus_.node_name(node_), 0, 0});
}

void RobulabBridge::command(double linear, double angular) {
  if (bus_.lifecycle(node_) != bus::Lifecycle::running) {
    report("bridge-stopped", "bridge node is not running; command dropped");
    return;
  }
  bus_.publish(node_, msg::kCommandVelocityTopic, msg::to_payload(msg::CmdVel{linear, angular}));
  ++command_count_;
}

void RobulabBridge::forward(double linear_speed) { command(linear_speed, 0.0); }
void RobulabBridge::turn(double angular_speed) { command(0.0, angular_speed); }
void RobulabBridge::stop() { command(0.0, 0.0); }

bool RobulabBridge::in_sector(Sector sector, double a) noexcept {
  const bool front = a >= -kQuarterPi - kAngleTolerance && a <= kQuarterPi + kAngleTolerance;
  switch (sector) {
    case Sector::front:
      return front;
    case Sector::front_right:
      return front && a < -kAngleTolerance;
    case Sector::front_left:
      return front && a >= -kAngleTolerance;
  }
  return false;
}

bool RobulabBridge::sector_obstacle(Sector sector, double minimum_distance) {
  if (!latest_scan_) {
    if (!warned_no_scan_) {
      warned_no_scan_ = true;
      report("no-scan", "no laser scan received yet; obstacle predicates answer false");
    }
    return false;
  }
  const auto& scan = *latest_scan_;
  for (std::size_t k = 0; k < scan.ranges.size(); ++k) {
    if (in_sector(sector, scan.beam_angle(k)) && scan.ranges[k] <= minimum_distance) return true;
  }
  return false;
}

EvalResult RobulabBridge::send(std::string_view selector, std::span<const Value> args) {
  if (selector == "stop" && args.empty()) {
    stop();
    return Value();
  }
  std::optional<Sector> sector;
  if (selector == "isThereAnObstacle:") sector = Sector::front;
  if (selector == "isThereARightObstacle:") sector = Sector::front_right;
  if (selector == "isThereALeftObstacle:") sector = Sector::front_left;
  if (sector) {
    auto d = number_arg(selector, args);
    if (!d) return d;
    return Value(sector_obstacle(*sector, d->number()));
  }
  if (selector == "forward:" || selector == "turn:") {
    auto speed = number_arg(selector, args);
    if (!speed) return speed;
    if (selector == "forward:") {
      forward(speed->number());
    } else {
      turn(speed->number());
    }
    return Value();
  }
  return unexpected(EvalError{EvalErrorKind::unknown_selector,
                              "RobulabBridge does not understand #" + std::string(selector)});
}

}  // namespace lrp
