#pragma once

#include "lrp/sim.hpp"

namespace lrp::sim::detail {

inline double beam_world_angle(double heading, std::size_t k) noexcept {
  return heading + (kAngleMin + static_cast<double>(k) * kAngleIncrement);
}

inline msg::LaserScan empty_scan() {
  return msg::LaserScan{kAngleMin, kAngleIncrement, kRangeMax, std::vector<double>(kBeamCount, kRangeMax)};
}

}  // namespace lrp::sim::detail
