#include "branchpde/sampling.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <numbers>

#include "branchpde/errors.hpp"

namespace branchpde {

namespace {

std::atomic<std::uint64_t> underflow_resamples{0};

constexpr double kUnderflowGuard = 1e-300;

}  // namespace

double sample_stable_subordinator(double alpha, double t, RngStream& rng) {
  if (!(alpha > 0.0 && alpha <= 2.0)) {
    throw DomainError("sample_stable_subordinator: alpha must lie in (0, 2]");
  }
  if (!(t > 0.0) || !std::isfinite(t)) throw DomainError("sample_stable_subordinator: t must be positive");
  if (alpha == 2.0) return 2.0 * t;

  const double a = alpha / 2.0;
  const double inv_a = 2.0 / alpha;
  const double log_prefactor = std::numbers::ln2 + inv_a * std::log(t);
  for (;;) {
    const double u = std::numbers::pi * (rng.uniform() - 0.5);
    const double e = rng.exponential();
    const double shifted = a * (u + std::numbers::pi / 2.0);
    // log of 2 t^(2/alpha) sin(shifted) / cos(u)^(2/alpha) (cos(u - shifted) / e)^(2/alpha - 1)
    const double log_s = log_prefactor + std::log(std::sin(shifted)) - inv_a * std::log(std::cos(u)) +
                         (inv_a - 1.0) * (std::log(std::cos(u - shifted)) - std::log(e));
    const double s = std::exp(log_s);
    if (s >= kUnderflowGuard && std::isfinite(s)) return s;
    underflow_resamples.fetch_add(1, std::memory_order_relaxed);
  }
}

std::uint64_t cms_underflow_resamples() { return underflow_resamples.load(std::memory_order_relaxed); }

IncrementSampler::IncrementSampler(double alpha, double kappa) : alpha_(alpha), kappa_(kappa) {
  if (!(alpha > 0.0 && alpha <= 2.0)) throw DomainError("IncrementSampler: alpha must lie in (0, 2]");
  if (!(kappa > 0.0) || !std::isfinite(kappa)) throw DomainError("IncrementSampler: kappa must be positive");
  scale_ = std::pow(kappa, 2.0 / alpha);
}

double IncrementSampler::sample_ds(double dt, RngStream& rng) const {
  if (!(dt > 0.0)) throw DomainError("IncrementSampler: dt must be positive");
  if (alpha_ == 2.0) return 2.0 * kappa_ * dt;
  return scale_ * sample_stable_subordinator(alpha_, dt, rng);
}

double IncrementSampler::sample(double dt, std::span<double> dx, RngStream& rng) const {
  const double ds = sample_ds(dt, rng);
  const double sd = std::sqrt(ds);
  for (double& v : dx) v = sd * rng.normal();
  return ds;
}

SubordinatedIncrement sample_subordinated_increment(int d, double alpha, double kappa, double dt,
                                                    RngStream& rng) {
  if (d < 1) throw DomainError("sample_subordinated_increment: d must be positive");
  SubordinatedIncrement inc;
  inc.dx.resize(static_cast<std::size_t>(d));
  inc.ds = IncrementSampler(alpha, kappa).sample(dt, inc.dx, rng);
  return inc;
}

double sample_lifetime(double delta, RngStream& rng) {
  if (!(delta > 0.0) || !std::isfinite(delta)) throw DomainError("sample_lifetime: delta must be positive");
  const double shape = delta < 1.0 ? delta + 1.0 : delta;
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    double x, v;
    do {
      x = rng.normal();
      v = 1.0 + c * x;
    } while (v <= 0.0);
    v = v * v * v;
    const double u = rng.uniform();
    const double x2 = x * x;
    if (u < 1.0 - 0.0331 * x2 * x2 || std::log(u) < 0.5 * x2 + d * (1.0 - v + std::log(v))) {
      double g = d * v;
      if (delta < 1.0) g *= std::exp(std::log(rng.uniform()) / delta);
      if (g > 0.0) return g;
    }
  }
}

std::size_t sample_category(std::span<const double> cdf, RngStream& rng) {
  if (cdf.empty()) throw DomainError("sample_category: empty distribution");
  if (cdf.size() == 1) return 0;
  const double u = rng.uniform();
  const auto it = std::upper_bound(cdf.begin(), cdf.end() - 1, u);
  return static_cast<std::size_t>(it - cdf.begin());
}

}  // namespace branchpde
