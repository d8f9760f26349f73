#include <benchmark/benchmark.h>

#include <vector>

#include "branchpde/expression.hpp"
#include "branchpde/specfun.hpp"

using namespace branchpde;

namespace {

void BM_Hyp2f1Series(benchmark::State& state) {
  double z = 0.1;
  for (auto _ : state) {
    benchmark::DoNotOptimize(specfun::hyp2f1(1.75, 1.75, 3.25, z));
    z = z < 0.8 ? z + 1e-3 : 0.1;
  }
}
BENCHMARK(BM_Hyp2f1Series);

void BM_Hyp2f1NearOne(benchmark::State& state) {
  double z = 0.91;
  for (auto _ : state) {
    benchmark::DoNotOptimize(specfun::hyp2f1(0.7, 0.4, 2.3, z));
    z = z < 0.999 ? z + 1e-5 : 0.91;
  }
}
BENCHMARK(BM_Hyp2f1NearOne);

// Arg: dimension. Psi for k = 1, alpha = 1.5, inside and outside the ball.
void BM_PsiGetoor(benchmark::State& state) {
  std::vector<double> x(static_cast<std::size_t>(state.range(0)), 0.0);
  double r = 0.0;
  for (auto _ : state) {
    x[0] = r;
    benchmark::DoNotOptimize(specfun::psi_getoor(1, 1.5, x));
    r = r < 2.0 ? r + 1e-3 : 0.0;
  }
}
BENCHMARK(BM_PsiGetoor)->Arg(1)->Arg(2)->Arg(10);

void BM_UpperRegGamma(benchmark::State& state) {
  double z = 1e-3;
  for (auto _ : state) {
    benchmark::DoNotOptimize(specfun::upper_reg_gamma(0.2, z));
    z = z < 10.0 ? z * 1.01 : 1e-3;
  }
}
BENCHMARK(BM_UpperRegGamma);

void BM_ExpressionEval(benchmark::State& state) {
  const auto e = expr::Expression::parse("exp(-t) * (1 - x1^2 - x2^2) + 0.5 * cos(x1 + x2) / (1 + t^2)", 2);
  std::vector<double> x = {0.3, -0.2};
  double t = 0.0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(e(t, x));
    t = t < 1.0 ? t + 1e-4 : 0.0;
  }
}
BENCHMARK(BM_ExpressionEval);

void BM_ExpressionParse(benchmark::State& state) {
  for (auto _ : state) {
    benchmark::DoNotOptimize(expr::Expression::parse("exp(-t) * (1 - x1^2 - x2^2) + 0.5 * cos(x1 + x2)", 2));
  }
}
BENCHMARK(BM_ExpressionParse);

}  // namespace

BENCHMARK_MAIN();
