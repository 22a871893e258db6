// Reference kernels. Kept for testing the OpenMP versions.

#include "beam.hpp"

namespace lrp::sim {

msg::LaserScan scan_serial(const World& world, const RobotState& robot) {
  auto out = detail::empty_scan();
  const Vec2 origin{robot.x, robot.y};
  const auto obstacles = world.obstacles();
  for (std::size_t k = 0; k < kBeamCount; ++k) {
    out.ranges[k] = raycast(obstacles, origin, detail::beam_world_angle(robot.theta, k));
  }
  return out;
}

void raycast_batch_serial(const World& world, std::span<const Ray> rays, std::span<double> out) {
  const auto obstacles = world.obstacles();
  for (std::size_t i = 0; i < rays.size(); ++i) {
    out[i] = raycast(obstacles, rays[i].origin, rays[i].angle);
  }
}

}  // namespace lrp::sim
