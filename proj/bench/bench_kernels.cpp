// Serial vs OpenMP reservoir right-hand side, and one full training run.
#include <map>
#include <random>
#include <vector>

#include <benchmark/benchmark.h>

#include "attractor_scout/experiment.hpp"
#include "attractor_scout/kernels.hpp"

using namespace ascout;

namespace {

// The library calls each benchmark several times while it calibrates, so
// the (dense eigensolve) construction is done once per size.
const ReservoirWeights& weights(int nodes) {
  static std::map<int, ReservoirWeights> cache;
  auto it = cache.find(nodes);
  if (it == cache.end()) {
    auto cfg = default_experiment("A").reservoir;
    cfg.nodes = nodes;
    cfg.topology_seed = 1;
    it = cache.emplace(nodes, build_reservoir(cfg)).first;
  }
  return it->second;
}

template <kernels::Backend B>
void rhs(benchmark::State& state) {
  const int n = static_cast<int>(state.range(0));
  const auto& w = weights(n);
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<double> x(n), drive(n), out(n);
  for (int i = 0; i < n; ++i) {
    x[i] = u(rng);
    drive[i] = u(rng);
  }
  const auto csr = w.csr();
  for (auto _ : state) {
    kernels::reservoir_rhs(B, csr, x, drive, out);
    benchmark::DoNotOptimize(out.data());
  }
  state.SetItemsProcessed(state.iterations() * n);
}

void train_published(benchmark::State& state) {
  const auto exp = default_experiment("A");
  auto cfg = exp.reservoir;
  cfg.topology_seed = 4;
  const auto w = build_reservoir(cfg);
  const auto series = make_training_series(exp.scenario, 1);
  for (auto _ : state) benchmark::DoNotOptimize(train(w, cfg, series, exp.ridge));
}

}  // namespace

BENCHMARK(rhs<kernels::Backend::Serial>)->Name("reservoir_rhs_serial")->RangeMultiplier(4)->Range(64, 1024);
BENCHMARK(rhs<kernels::Backend::OpenMP>)->Name("reservoir_rhs_parallel")->RangeMultiplier(4)->Range(64, 1024);
BENCHMARK(train_published)->Unit(benchmark::kSecond)->Iterations(1);

BENCHMARK_MAIN();
