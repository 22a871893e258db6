#pragma once

// JSON world description:
//
//   {"segments": [{"x1": 3, "y1": -5, "x2": 3, "y2": 5}, ...],
//    "pose": {"x": 0, "y": 0, "theta": 0},
//    "radius": 0.25,                                      (optional)
//    "bounds": {"xmin": -10, "ymin": -10, "xmax": 10, "ymax": 10}}  (optional)

#include <string>
#include <string_view>

#include "lrp/expected.hpp"
#include "lrp/sim.hpp"

namespace lrp::sim {

struct WorldSpec {
  World world;
  RobotState initial;
};

Expected<WorldSpec, std::string> parse_world(std::string_view json_text);
Expected<WorldSpec, std::string> load_world(const std::string& path);

}  // namespace lrp::sim
