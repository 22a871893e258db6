#include "beam.hpp"

namespace lrp::sim {

msg::LaserScan scan_parallel(const World& world, const RobotState& robot) {
  auto out = detail::empty_scan();
  const Vec2 origin{robot.x, robot.y};
  const auto obstacles = world.obstacles();
  double* ranges = out.ranges.data();
  const auto beams = static_cast<long>(kBeamCount);
  // Few obstacles make a beam too cheap to be worth a thread team.
#pragma omp parallel for schedule(static) if (obstacles.size() >= 16)
  for (long k = 0; k < beams; ++k) {
    ranges[k] = raycast(obstacles, origin, detail::beam_world_angle(robot.theta, static_cast<std::size_t>(k)));
  }
  return out;
}

void raycast_batch_parallel(const World& world, std::span<const Ray> rays, std::span<double> out) {
  const auto obstacles = world.obstacles();
  const auto n = static_cast<long>(rays.size());
#pragma omp parallel for schedule(static)
  for (long i = 0; i < n; ++i) {
    out[static_cast<std::size_t>(i)] = raycast(obstacles, rays[static_cast<std::size_t>(i)].origin,
                                               rays[static_cast<std::size_t>(i)].angle);
  }
}

}  // namespace lrp::sim
