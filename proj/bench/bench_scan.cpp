// Serial reference vs OpenMP kernels for laser scans and batched raycasts.

#include <benchmark/benchmark.h>

#include <random>

#include "lrp/sim.hpp"

namespace {

using namespace lrp::sim;

World cluttered(int n) {
  std::mt19937 rng(17);
  std::uniform_real_distribution<double> u(-9.0, 9.0);
  std::vector<Segment> segs;
  while (static_cast<int>(segs.size()) < n) {
    Segment s{{u(rng), u(rng)}, {u(rng), u(rng)}};
    if (std::hypot(s.b.x - s.a.x, s.b.y - s.a.y) > 0.1) segs.push_back(s);
  }
  return World(std::move(segs), Bounds{-10, -10, 10, 10});
}

std::vector<Ray> random_rays(std::size_t n) {
  std::mt19937 rng(5);
  std::uniform_real_distribution<double> u(-9.0, 9.0);
  std::vector<Ray> rays(n);
  for (auto& r : rays) r = Ray{{u(rng), u(rng)}, u(rng)};
  return rays;
}

template <lrp::msg::LaserScan (*Kernel)(const World&, const RobotState&)>
void BM_Scan(benchmark::State& state) {
  const World world = cluttered(static_cast<int>(state.range(0)));
  const RobotState robot{0.3, -0.2, 0.7};
  for (auto _ : state) benchmark::DoNotOptimize(Kernel(world, robot));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(kBeamCount));
}

template <void (*Kernel)(const World&, std::span<const Ray>, std::span<double>)>
void BM_Batch(benchmark::State& state) {
  const World world = cluttered(64);
  const auto rays = random_rays(static_cast<std::size_t>(state.range(0)));
  std::vector<double> out(rays.size());
  for (auto _ : state) {
    Kernel(world, rays, out);
    benchmark::ClobberMemory();
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}

}  // namespace

BENCHMARK(BM_Scan<scan_serial>)->Name("scan/serial")->Arg(1)->Arg(16)->Arg(128)->Arg(1024);
BENCHMARK(BM_Scan<scan_parallel>)->Name("scan/openmp")->Arg(1)->Arg(16)->Arg(128)->Arg(1024);
BENCHMARK(BM_Batch<raycast_batch_serial>)->Name("raycast_batch/serial")->Arg(1 << 10)->Arg(1 << 16);
BENCHMARK(BM_Batch<raycast_batch_parallel>)->Name("raycast_batch/openmp")->Arg(1 << 10)->Arg(1 << 16);

BENCHMARK_MAIN();
