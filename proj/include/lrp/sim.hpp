#pragma once

// 2D unicycle robot among line-segment obstacles, with a 271-beam planar
// laser covering 270 degrees at 1 degree spacing.
//
// The scan and batch raycast kernels come in two builds: a serial reference
// and an OpenMP version. Both compute each beam independently with the same
// arithmetic, so their results are bitwise identical.

#include <numbers>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "lrp/messages.hpp"

namespace lrp::sim {

inline constexpr double kRangeMax = 30.0;
inline constexpr std::size_t kBeamCount = 271;
inline constexpr double kDegree = std::numbers::pi / 180.0;
inline constexpr double kAngleMin = -135.0 * kDegree;
inline constexpr double kAngleIncrement = kDegree;
inline constexpr double kDefaultRadius = 0.25;

struct Vec2 {
  double x = 0.0;
  double y = 0.0;
};

struct Segment {
  Vec2 a;
  Vec2 b;
};

struct Bounds {
  double xmin = 0.0;
  double ymin = 0.0;
  double xmax = 0.0;
  double ymax = 0.0;
};

class WorldError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Obstacles are the listed segments plus the four edges of `bounds`.
class World {
 public:
  World() = default;
  /// Throws WorldError for non-finite or zero-length segments.
  explicit World(std::vector<Segment> segments, std::optional<Bounds> bounds = std::nullopt);

  const std::vector<Segment>& segments() const noexcept { return segments_; }
  const std::optional<Bounds>& bounds() const noexcept { return bounds_; }
  std::span<const Segment> obstacles() const noexcept { return obstacles_; }

 private:
  std::vector<Segment> segments_;
  std::optional<Bounds> bounds_;
  std::vector<Segment> obstacles_;
};

struct RobotState {
  double x = 0.0;
  double y = 0.0;
  double theta = 0.0;  // (-pi, pi]
  double v = 0.0;      // commanded linear speed, m/s
  double omega = 0.0;  // commanded angular speed, rad/s
  double radius = kDefaultRadius;
  bool collided = false;  // sticky until reset
};

struct Ray {
  Vec2 origin;
  double angle = 0.0;
};

double normalize_angle(double a) noexcept;

/// Distance along the ray to the nearest obstacle, capped at kRangeMax.
double raycast(std::span<const Segment> obstacles, Vec2 origin, double angle) noexcept;
inline double raycast(const World& world, Vec2 origin, double angle) noexcept {
  return raycast(world.obstacles(), origin, angle);
}

msg::LaserScan scan_serial(const World& world, const RobotState& robot);
msg::LaserScan scan_parallel(const World& world, const RobotState& robot);
inline msg::LaserScan scan(const World& world, const RobotState& robot) {
  return scan_parallel(world, robot);
}

/// out.size() must equal rays.size().
void raycast_batch_serial(const World& world, std::span<const Ray> rays, std::span<double> out);
void raycast_batch_parallel(const World& world, std::span<const Ray> rays, std::span<double> out);

/// Earliest fraction t in [0, 1] of `delta` at which a disc of `radius`
/// starting at `from` touches `seg`, or nullopt. Motion that leaves an
/// existing contact is not a hit.
std::optional<double> first_contact(Vec2 from, Vec2 delta, double radius, const Segment& seg) noexcept;

/// One forward-Euler unicycle step; the disc stops at first contact.
RobotState step(const RobotState& robot, const World& world, double dt);

double distance_to_segment(Vec2 p, const Segment& seg) noexcept;

}  // namespace lrp::sim
