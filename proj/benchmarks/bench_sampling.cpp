#include <benchmark/benchmark.h>

#include <vector>

#include "branchpde/rng.hpp"
#include "branchpde/sampling.hpp"

using namespace branchpde;

namespace {

void BM_Uniform(benchmark::State& state) {
  RngStream rng(1, 0);
  for (auto _ : state) benchmark::DoNotOptimize(rng.uniform());
}
BENCHMARK(BM_Uniform);

void BM_Normal(benchmark::State& state) {
  RngStream rng(1, 0);
  for (auto _ : state) benchmark::DoNotOptimize(rng.normal());
}
BENCHMARK(BM_Normal);

void BM_StreamSetup(benchmark::State& state) {
  std::uint64_t stream = 0;
  for (auto _ : state) {
    RngStream rng(1, stream++);
    benchmark::DoNotOptimize(rng.uniform());
  }
}
BENCHMARK(BM_StreamSetup);

// Arg: 100 * alpha.
void BM_StableSubordinator(benchmark::State& state) {
  const double alpha = static_cast<double>(state.range(0)) / 100.0;
  RngStream rng(1, 0);
  for (auto _ : state) benchmark::DoNotOptimize(sample_stable_subordinator(alpha, 0.5, rng));
}
BENCHMARK(BM_StableSubordinator)->Arg(120)->Arg(150)->Arg(180)->Arg(200);

// Arg: dimension.
void BM_Increment(benchmark::State& state) {
  const IncrementSampler sampler(1.5, 1.0);
  std::vector<double> dx(static_cast<std::size_t>(state.range(0)));
  RngStream rng(1, 0);
  for (auto _ : state) {
    benchmark::DoNotOptimize(sampler.sample(0.5, dx, rng));
    benchmark::ClobberMemory();
  }
}
BENCHMARK(BM_Increment)->Arg(1)->Arg(2)->Arg(10);

void BM_Lifetime(benchmark::State& state) {
  RngStream rng(1, 0);
  for (auto _ : state) benchmark::DoNotOptimize(sample_lifetime(0.2, rng));
}
BENCHMARK(BM_Lifetime);

}  // namespace

BENCHMARK_MAIN();
