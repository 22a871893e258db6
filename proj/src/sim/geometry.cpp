#include <algorithm>
#include <cmath>

#include "lrp/sim.hpp"

namespace lrp::sim {

namespace {

constexpr double kEps = 1e-12;

double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
double cross(Vec2 a, Vec2 b) { return a.x * b.y - a.y * b.x; }
Vec2 sub(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }

bool finite(Vec2 p) { return std::isfinite(p.x) && std::isfinite(p.y); }

std::optional<double> circle_contact(Vec2 from, Vec2 delta, double radius, Vec2 center) {
  const Vec2 w = sub(from, center);
  const double a = dot(delta, delta);
  const double b = 2.0 * dot(delta, w);
  const double c = dot(w, w) - radius * radius;
  if (a <= 0.0 || b >= 0.0) return std::nullopt;  // still or moving away
  if (c <= kEps) return 0.0;
  const double disc = b * b - 4.0 * a * c;
  if (disc < 0.0) return std::nullopt;
  const double t = (-b - std::sqrt(disc)) / (2.0 * a);
  if (t < 0.0 || t > 1.0) return std::nullopt;
  return t;
}

}  // namespace

World::World(std::vector<Segment> segments, std::optional<Bounds> bounds)
    : segments_(std::move(segments)), bounds_(bounds) {
  for (const auto& s : segments_) {
    if (!finite(s.a) || !finite(s.b)) throw WorldError("segment has a non-finite coordinate");
    if (std::hypot(s.b.x - s.a.x, s.b.y - s.a.y) <= 0.0) throw WorldError("segment has zero length");
  }
  obstacles_ = segments_;
  if (bounds_) {
    const auto& b = *bounds_;
    if (!(b.xmax > b.xmin && b.ymax > b.ymin)) throw WorldError("bounds rectangle is empty");
    obstacles_.push_back({{b.xmin, b.ymin}, {b.xmax, b.ymin}});
    obstacles_.push_back({{b.xmax, b.ymin}, {b.xmax, b.ymax}});
    obstacles_.push_back({{b.xmax, b.ymax}, {b.xmin, b.ymax}});
    obstacles_.push_back({{b.xmin, b.ymax}, {b.xmin, b.ymin}});
  }
}

double normalize_angle(double a) noexcept {
  a = std::remainder(a, 2.0 * std::numbers::pi);  // [-pi, pi]
  if (a <= -std::numbers::pi) a += 2.0 * std::numbers::pi;
  return a;
}

double raycast(std::span<const Segment> obstacles, Vec2 origin, double angle) noexcept {
  const Vec2 d{std::cos(angle), std::sin(angle)};
  double best = kRangeMax;
  for (const auto& seg : obstacles) {
    const Vec2 e = sub(seg.b, seg.a);
    const Vec2 w = sub(seg.a, origin);
    const double denom = cross(d, e);
    if (std::fabs(denom) < kEps * std::max(1.0, std::hypot(e.x, e.y))) {
      // Parallel. A collinear segment ahead is hit at its nearest point.
      if (std::fabs(cross(w, d)) > kEps) continue;
      const double t0 = dot(w, d);
      const double t1 = dot(sub(seg.b, origin), d);
      double t = -1.0;
      if (t0 <= 0.0 && t1 >= 0.0) t = 0.0;
      else if (t1 <= 0.0 && t0 >= 0.0) t = 0.0;
      else if (t0 > 0.0 && t1 > 0.0) t = std::min(t0, t1);
      if (t >= 0.0) best = std::min(best, t);
      continue;
    }
    const double t = cross(w, e) / denom;
    const double s = cross(w, d) / denom;
    if (t >= 0.0 && s >= 0.0 && s <= 1.0) best = std::min(best, t);
  }
  return best;
}

double distance_to_segment(Vec2 p, const Segment& seg) noexcept {
  const Vec2 e = sub(seg.b, seg.a);
  const double len2 = dot(e, e);
  double s = len2 > 0.0 ? dot(sub(p, seg.a), e) / len2 : 0.0;
  s = std::clamp(s, 0.0, 1.0);
  const Vec2 closest{seg.a.x + s * e.x, seg.a.y + s * e.y};
  return std::hypot(p.x - closest.x, p.y - closest.y);
}

std::optional<double> first_contact(Vec2 from, Vec2 delta, double radius, const Segment& seg) noexcept {
  if (delta.x == 0.0 && delta.y == 0.0) return std::nullopt;
  std::optional<double> best;
  auto take = [&best](std::optional<double> t) {
    if (t && (!best || *t < *best)) best = t;
  };

  // Flat sides of the capsule around the segment.
  const Vec2 e = sub(seg.b, seg.a);
  const double len = std::hypot(e.x, e.y);
  const Vec2 u{e.x / len, e.y / len};
  Vec2 n{-u.y, u.x};
  double s0 = dot(sub(from, seg.a), n);
  if (s0 < 0.0) {
    n = {-n.x, -n.y};
    s0 = -s0;
  }
  const double approach = dot(delta, n);  // negative when closing in
  if (approach < 0.0) {
    const double t = s0 >= radius ? (s0 - radius) / -approach : 0.0;
    if (t <= 1.0) {
      const Vec2 p{from.x + t * delta.x, from.y + t * delta.y};
      const double along = dot(sub(p, seg.a), u);
      if (along >= 0.0 && along <= len) take(t);
    }
  }

  // Rounded ends.
  take(circle_contact(from, delta, radius, seg.a));
  take(circle_contact(from, delta, radius, seg.b));
  return best;
}

RobotState step(const RobotState& robot, const World& world, double dt) {
  RobotState next = robot;
  const double dist = robot.v * dt;
  const Vec2 delta{dist * std::cos(robot.theta), dist * std::sin(robot.theta)};
  const Vec2 from{robot.x, robot.y};
  std::optional<double> contact;
  for (const auto& seg : world.obstacles()) {
    const auto t = first_contact(from, delta, robot.radius, seg);
    if (t && (!contact || *t < *contact)) contact = t;
  }
  const double frac = contact ? *contact : 1.0;
  next.x = from.x + frac * delta.x;
  next.y = from.y + frac * delta.y;
  next.theta = normalize_angle(robot.theta + robot.omega * dt);
  if (contact) next.collided = true;
  return next;
}

}  // namespace lrp::sim
