#pragma once

// Typed views of the three wire schemas used by the robot graph.

#include <optional>
#include <vector>

#include "lrp/pubsub.hpp"

namespace lrp::msg {

inline constexpr const char* kCommandVelocityTopic = "/command_velocity";
inline constexpr const char* kLaserTopic = "/laser";
inline constexpr const char* kPoseTopic = "/pose";

struct CmdVel {
  double linear = 0.0;   // m/s
  double angular = 0.0;  // rad/s, counterclockwise positive
  bool operator==(const CmdVel&) const = default;
};

struct Pose2D {
  double x = 0.0;
  double y = 0.0;
  double theta = 0.0;
  bool operator==(const Pose2D&) const = default;
};

struct LaserScan {
  double angle_min = 0.0;  // relative to heading
  double angle_increment = 0.0;
  double range_max = 0.0;
  std::vector<double> ranges;

  double beam_angle(std::size_t k) const { return angle_min + static_cast<double>(k) * angle_increment; }
  bool operator==(const LaserScan&) const = default;
};

bus::Payload to_payload(const CmdVel& m);
bus::Payload to_payload(const Pose2D& m);
bus::Payload to_payload(const LaserScan& m);

/// nullopt for a wrong schema or a non-finite field.
std::optional<CmdVel> cmd_vel_from(const bus::Payload& p);
std::optional<Pose2D> pose_from(const bus::Payload& p);
std::optional<LaserScan> laser_from(const bus::Payload& p);

}  // namespace lrp::msg
