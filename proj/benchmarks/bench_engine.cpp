#include <benchmark/benchmark.h>

#include <vector>

#include "branchpde/engine.hpp"

using namespace branchpde;

namespace {

// Args: d, k. Reference runs at t = 0.9, T = 1.
void BM_GrowTree(benchmark::State& state, const char* name, double kappa) {
  BuiltinParams p;
  p.d = static_cast<int>(state.range(0));
  p.k = static_cast<int>(state.range(1));
  p.kappa = kappa;
  const PdeModel model = builtin_model(name, p);
  TreeGrower grower(model, 1.0);
  std::vector<double> x(static_cast<std::size_t>(p.d), 0.0);
  x[0] = 0.3;
  std::uint64_t stream = 0;
  std::size_t particles = 0;
  for (auto _ : state) {
    RngStream rng(1, stream++);
    const auto outcome = grower.grow(0.9, x, 0, rng);
    particles += outcome.particles_total;
    benchmark::DoNotOptimize(outcome.h_value);
  }
  state.counters["particles/tree"] =
      benchmark::Counter(static_cast<double>(particles), benchmark::Counter::kAvgIterations);
}

BENCHMARK_CAPTURE(BM_GrowTree, nld, "nld", 1.0)->Args({1, 0})->Args({1, 1})->Args({10, 0})->Args({10, 1});
BENCHMARK_CAPTURE(BM_GrowTree, gradd, "gradd", 1.0)->Args({2, 1})->Args({2, 2});
BENCHMARK_CAPTURE(BM_GrowTree, burgers_cosine, "burgers-cosine", 10.0)->Args({2, 0});

void BM_EstimateLinear(benchmark::State& state) {
  const PdeModel model = builtin_model("linear-test", {});
  EstimatorOptions o;
  o.n_trees = static_cast<std::size_t>(state.range(0));
  const std::vector<double> x = {0.0};
  for (auto _ : state) benchmark::DoNotOptimize(estimate(model, 0.5, x, 0, 1.0, o).mean);
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_EstimateLinear)->Arg(10'000)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
