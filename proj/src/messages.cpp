#include "lrp/messages.hpp"

#include <algorithm>
#include <cmath>

namespace lrp::msg {

bus::Payload to_payload(const CmdVel& m) {
  return {"cmd_vel", {{"linear", m.linear}, {"angular", m.angular}}};
}

bus::Payload to_payload(const Pose2D& m) {
  return {"pose", {{"x", m.x}, {"y", m.y}, {"theta", m.theta}}};
}

bus::Payload to_payload(const LaserScan& m) {
  return {"laser",
          {{"angle_min", m.angle_min},
           {"angle_increment", m.angle_increment},
           {"range_max", m.range_max},
           {"ranges", m.ranges}}};
}

namespace {

std::optional<double> finite(const bus::Payload& p, const char* field) {
  auto v = p.number(field);
  if (!v || !std::isfinite(*v)) return std::nullopt;
  return v;
}

}  // namespace

std::optional<CmdVel> cmd_vel_from(const bus::Payload& p) {
  if (p.schema != "cmd_vel") return std::nullopt;
  const auto linear = finite(p, "linear");
  const auto angular = finite(p, "angular");
  if (!linear || !angular) return std::nullopt;
  return CmdVel{*linear, *angular};
}

std::optional<Pose2D> pose_from(const bus::Payload& p) {
  if (p.schema != "pose") return std::nullopt;
  const auto x = finite(p, "x");
  const auto y = finite(p, "y");
  const auto theta = finite(p, "theta");
  if (!x || !y || !theta) return std::nullopt;
  return Pose2D{*x, *y, *theta};
}

std::optional<LaserScan> laser_from(const bus::Payload& p) {
  if (p.schema != "laser") return std::nullopt;
  const auto angle_min = finite(p, "angle_min");
  const auto inc = finite(p, "angle_increment");
  const auto range_max = finite(p, "range_max");
  const auto* ranges = p.list("ranges");
  if (!angle_min || !inc || !range_max || ranges == nullptr) return std::nullopt;
  if (!std::all_of(ranges->begin(), ranges->end(), [](double r) { return std::isfinite(r); })) {
    return std::nullopt;
  }
  return LaserScan{*angle_min, *inc, *range_max, *ranges};
}

}  // namespace lrp::msg
