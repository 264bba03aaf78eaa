// Benchmarks comparing the OpenMP kernels against their serial references.

#include <benchmark/benchmark.h>

#include <vector>

#include "../tests/support/grid_oracle.hpp"
#include "sopjam/rng.hpp"
#include "sopjam/scenario.hpp"
#include "sopjam/sim.hpp"

namespace {

using sopjam::Vec2;
using sopjam::testing::GridSpec;

struct GridProblem {
  std::vector<Vec2> anchors;
  std::vector<double> ranges;
  GridSpec grid;
};

GridProblem make_grid_problem() {
  sopjam::RandomStream rng(7, "bench_grid");
  GridProblem p;
  const Vec2 truth(12.5, -3.0);
  for (int i = 0; i < 6; ++i) {
    Vec2 a(rng.uniform() * 200.0 - 100.0, rng.uniform() * 200.0 - 100.0);
    p.anchors.push_back(a);
    p.ranges.push_back((truth - a).norm() + rng.gaussian(0.0, 1.0));
  }
  p.grid = {truth.x(), truth.y(), 40.0, 0.1};
  return p;
}

void BM_grid_search_serial(benchmark::State& state) {
  const GridProblem p = make_grid_problem();
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        sopjam::testing::grid_search_serial(p.anchors, p.ranges, p.grid));
  }
}
BENCHMARK(BM_grid_search_serial)->Unit(benchmark::kMillisecond);

void BM_grid_search_parallel(benchmark::State& state) {
  const GridProblem p = make_grid_problem();
  for (auto _ : state) {
    benchmark::DoNotOptimize(
        sopjam::testing::grid_search_parallel(p.anchors, p.ranges, p.grid));
  }
}
BENCHMARK(BM_grid_search_parallel)->Unit(benchmark::kMillisecond);

std::vector<sopjam::Scenario> make_batch(int count) {
  sopjam::Scenario base =
      sopjam::load_scenario(std::string(SOPJAM_SCENARIO_DIR) +
                            "/reference.json");
  base.duration_steps = 400;
  std::vector<sopjam::Scenario> out;
  for (int i = 0; i < count; ++i) {
    sopjam::Scenario sc = base;
    sc.seed = static_cast<std::uint64_t>(100 + i);
    out.push_back(std::move(sc));
  }
  return out;
}

void BM_batch_serial(benchmark::State& state) {
  const auto configs = make_batch(4);
  for (auto _ : state) {
    benchmark::DoNotOptimize(sopjam::batch_run_serial(configs));
  }
}
BENCHMARK(BM_batch_serial)->Unit(benchmark::kMillisecond);

void BM_batch_parallel(benchmark::State& state) {
  const auto configs = make_batch(4);
  for (auto _ : state) {
    benchmark::DoNotOptimize(sopjam::batch_run(configs));
  }
}
BENCHMARK(BM_batch_parallel)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
