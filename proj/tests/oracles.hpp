#pragma once

#include <cmath>
#include <optional>

#include "lrp/sim.hpp"

namespace lrp::test {

// Ray/segment distance computed independently of the simulator: intersect the
// ray with the segment's supporting line in implicit form (n . p = c), then
// locate the hit along the segment by projection. `boundary` is set when the
// hit lies within a hair of an endpoint, where either answer is acceptable.
inline std::optional<double> oracle_hit(sim::Vec2 o, double angle, const sim::Segment& s, bool* boundary) {
  const double dx = std::cos(angle), dy = std::sin(angle);
  const double ex = s.b.x - s.a.x, ey = s.b.y - s.a.y;
  const double len = std::sqrt(ex * ex + ey * ey);
  const double nx = -ey / len, ny = ex / len;
  const double c = nx * s.a.x + ny * s.a.y;
  const double rate = nx * dx + ny * dy;
  if (std::abs(rate) < 1e-9) return std::nullopt;  // parallel; never generated on purpose
  const double t = (c - (nx * o.x + ny * o.y)) / rate;
  if (t < 0.0) return std::nullopt;
  const double px = o.x + t * dx, py = o.y + t * dy;
  const double along = ((px - s.a.x) * ex + (py - s.a.y) * ey) / len;
  if (std::abs(along) < 1e-7 || std::abs(along - len) < 1e-7) *boundary = true;
  if (along < 0.0 || along > len) return std::nullopt;
  return t;
}

inline sim::Vec2 rotate(sim::Vec2 p, double phi) {
  return {p.x * std::cos(phi) - p.y * std::sin(phi), p.x * std::sin(phi) + p.y * std::cos(phi)};
}

}  // namespace lrp::test
