// Microbenchmarks for the hot paths: the transition minimization (fast
// envelope scan vs naive quadratic scan), A-line synthesis, windowed
// correlation, and a small end-to-end tracking run.

#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "oce/dp_tracker.hpp"
#include "oce/simulator.hpp"

namespace {

using namespace oce;

StateGrid grid_with_states(int target) {
  DPConfig cfg;
  cfg.a_max_um = 0.439 * ((target - 1) / 2) + 0.01; // R = target (odd)
  return build_states(cfg, 0.878, 1.0);
}

std::vector<double> random_costs(std::size_t n) {
  std::mt19937_64 rng(42);
  std::uniform_real_distribution<double> d(0.0, 10.0);
  std::vector<double> v(n);
  for (auto& x : v) x = d(rng);
  return v;
}

void BM_MinTransitionFast(benchmark::State& state) {
  const StateGrid g = grid_with_states(int(state.range(0)));
  const auto prev = random_costs(g.size());
  std::vector<double> cost;
  std::vector<int> src;
  for (auto _ : state) {
    min_transition(g, prev, 1e-5, 1e-5, cost, src);
    benchmark::DoNotOptimize(cost.data());
  }
  state.SetItemsProcessed(state.iterations() * int64_t(g.size()));
}
BENCHMARK(BM_MinTransitionFast)->Arg(65)->Arg(257)->Arg(1025);

void BM_MinTransitionNaive(benchmark::State& state) {
  const StateGrid g = grid_with_states(int(state.range(0)));
  const auto prev = random_costs(g.size());
  std::vector<double> cost;
  std::vector<int> src;
  for (auto _ : state) {
    min_transition_naive(g, prev, 1e-5, 1e-5, cost, src);
    benchmark::DoNotOptimize(cost.data());
  }
  state.SetItemsProcessed(state.iterations() * int64_t(g.size()));
}
BENCHMARK(BM_MinTransitionNaive)->Arg(65)->Arg(257)->Arg(1025);

void BM_SynthesizeAline(benchmark::State& state) {
  SimConfig cfg;
  const ScattererField phantom = build_phantom(cfg);
  for (auto _ : state) {
    auto a = synthesize_aline(phantom.columns[0], cfg, 0, 0);
    benchmark::DoNotOptimize(a.data());
  }
}
BENCHMARK(BM_SynthesizeAline);

void BM_NccWindow(benchmark::State& state) {
  SimConfig cfg;
  cfg.n_alines = 16;
  const ScattererField phantom = build_phantom(cfg);
  const ComplexBScan I1 = synthesize_bscan(phantom, cfg, 1, 0);
  const ComplexBScan I2 = synthesize_bscan(phantom, cfg, 1, 1);
  for (auto _ : state) {
    auto v = ncc(I1, I2, 256, 8, 1.3, 0.0, 5, 5);
    benchmark::DoNotOptimize(v.value);
  }
}
BENCHMARK(BM_NccWindow);

void BM_TrackSmall(benchmark::State& state) {
  SimConfig cfg;
  cfg.n_lines = 257;
  cfg.n_alines = 8;
  const ScattererField phantom = build_phantom(cfg);
  const auto moved = deform_phantom(phantom, DeformationProfile::constant(1.3), cfg);
  const ComplexBScan I1 = synthesize_bscan(phantom, cfg, 1, 0);
  const ComplexBScan I2 = synthesize_bscan(moved.field, cfg, 1, 1);
  DPConfig dp;
  dp.a_max_um = 6.0;
  for (auto _ : state) {
    auto f = track(I1, I2, dp, 1);
    benchmark::DoNotOptimize(f.axial_um.data());
  }
}
BENCHMARK(BM_TrackSmall);

} // namespace

BENCHMARK_MAIN();
