#include "branchpde/specfun.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "branchpde/errors.hpp"

namespace branchpde::specfun {

namespace {

bool is_non_positive_integer(double v) { return v <= 0.0 && v == std::floor(v); }

double gamma_sign(double x) {
  if (x > 0.0) return 1.0;
  return (static_cast<long long>(std::floor(x)) % 2 == 0) ? 1.0 : -1.0;
}

// Plain power series with a geometric tail bound. The bound uses
// max(|term ratio|, |z|), valid once the ratio sequence is monotone.
double series_2f1(double a, double b, double c, double z, const EvalPolicy& policy) {
  double sum = 1.0;
  double term = 1.0;
  const double az = std::abs(z);
  for (int n = 0; n < policy.max_terms; ++n) {
    const double factor = (a + n) * (b + n) / ((c + n) * (n + 1.0));
    term *= factor * z;
    sum += term;
    if (term == 0.0) return sum;
    const double ratio = std::max(std::abs(factor * z), az);
    if (ratio < 1.0 && n > 2) {
      const double tail = std::abs(term) * ratio / (1.0 - ratio);
      if (tail <= policy.rel_tol * std::abs(sum)) return sum;
    }
  }
  const double ratio = az;
  const double bound = ratio < 1.0 ? std::abs(term) * ratio / (1.0 - ratio)
                                   : std::numeric_limits<double>::infinity();
  throw AccuracyError("hyp2f1: series did not converge within " +
                          std::to_string(policy.max_terms) + " terms",
                      sum, bound);
}

double terminating_2f1(double a, double b, double c, double z) {
  // The series stops at the non-positive integer parameter closest to zero.
  const double neg = is_non_positive_integer(a) && is_non_positive_integer(b)
                         ? std::max(a, b)
                         : (is_non_positive_integer(a) ? a : b);
  const long long n_max = static_cast<long long>(-neg);
  double sum = 1.0;
  double term = 1.0;
  for (long long n = 0; n < n_max; ++n) {
    term *= (a + n) * (b + n) / ((c + n) * (n + 1.0)) * z;
    sum += term;
  }
  return sum;
}

// Gamma(p1) Gamma(p2) / (Gamma(q1) Gamma(q2)) in log space, with 1/Gamma = 0 at poles.
double gamma_ratio(double p1, double p2, double q1, double q2) {
  if (is_non_positive_integer(q1) || is_non_positive_integer(q2)) return 0.0;
  const double log_mag =
      std::lgamma(p1) + std::lgamma(p2) - std::lgamma(q1) - std::lgamma(q2);
  const double sign = gamma_sign(p1) * gamma_sign(p2) * gamma_sign(q1) * gamma_sign(q2);
  return sign * std::exp(log_mag);
}

}  // namespace

void EvalPolicy::validate() const {
  if (!(rel_tol > 0.0 && rel_tol <= 1e-3)) {
    throw DomainError("EvalPolicy: rel_tol must lie in (0, 1e-3]");
  }
  if (max_terms < 100) throw DomainError("EvalPolicy: max_terms must be >= 100");
}

double gamma_fn(double p) {
  if (!std::isfinite(p) || p <= 0.0) {
    throw DomainError("gamma_fn: argument must be finite and positive");
  }
  return std::tgamma(p);
}

double gamma_signed(double x) {
  if (!std::isfinite(x) || is_non_positive_integer(x)) {
    throw DomainError("gamma_signed: pole or non-finite argument");
  }
  if (x > 0.0) return std::tgamma(x);
  // Gamma(x) Gamma(1 - x) = pi / sin(pi x)
  return std::numbers::pi / (std::sin(std::numbers::pi * x) * std::tgamma(1.0 - x));
}

double reciprocal_gamma(double x) {
  if (is_non_positive_integer(x)) return 0.0;
  return 1.0 / gamma_signed(x);
}

double lower_reg_gamma(double delta, double z, const EvalPolicy& policy) {
  if (!(delta > 0.0) || !std::isfinite(delta) || !(z >= 0.0)) {
    throw DomainError("lower_reg_gamma: need delta > 0 and z >= 0");
  }
  if (z == 0.0) return 0.0;
  if (std::isinf(z)) return 1.0;
  if (z >= delta + 1.0) return 1.0 - upper_reg_gamma(delta, z, policy);
  double term = 1.0 / delta;
  double sum = term;
  for (int n = 1; n < policy.max_terms; ++n) {
    term *= z / (delta + n);
    sum += term;
    if (term < sum * 1e-16) break;
  }
  return std::min(1.0, sum * std::exp(delta * std::log(z) - z - std::lgamma(delta)));
}

double upper_reg_gamma(double delta, double z, const EvalPolicy& policy) {
  if (!(delta > 0.0) || !std::isfinite(delta)) {
    throw DomainError("upper_reg_gamma: delta must be finite and positive");
  }
  if (!(z >= 0.0)) throw DomainError("upper_reg_gamma: z must be non-negative");
  if (z == 0.0) return 1.0;
  if (std::isinf(z)) return 0.0;

  const double log_prefactor = delta * std::log(z) - z - std::lgamma(delta);
  if (z < delta + 1.0) {
    double term = 1.0 / delta;
    double sum = term;
    for (int n = 1; n < policy.max_terms; ++n) {
      term *= z / (delta + n);
      sum += term;
      if (term < sum * 1e-16) break;
    }
    const double lower = sum * std::exp(log_prefactor);
    return std::clamp(1.0 - lower, 0.0, 1.0);
  }

  // Modified Lentz evaluation of the continued fraction for Gamma(delta, z).
  constexpr double tiny = 1e-300;
  double b = z + 1.0 - delta;
  double c = 1.0 / tiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i < policy.max_terms; ++i) {
    const double an = -i * (i - delta);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double step = d * c;
    h *= step;
    if (std::abs(step - 1.0) < 1e-16) break;
  }
  return std::clamp(std::exp(log_prefactor) * h, 0.0, 1.0);
}

double hyp2f1(double a, double b, double c, double z, const EvalPolicy& policy) {
  policy.validate();
  if (!std::isfinite(a) || !std::isfinite(b) || !std::isfinite(c) || !std::isfinite(z)) {
    throw DomainError("hyp2f1: non-finite argument");
  }
  const bool terminating = is_non_positive_integer(a) || is_non_positive_integer(b);
  if (is_non_positive_integer(c)) {
    const double stop = is_non_positive_integer(a) && is_non_positive_integer(b)
                            ? std::max(a, b)
                            : (is_non_positive_integer(a) ? a : b);
    if (!terminating || stop < c) {
      throw DomainError("hyp2f1: c is a non-positive integer");
    }
  }
  if (terminating) return terminating_2f1(a, b, c, z);
  if (z == 0.0) return 1.0;
  if (z > 1.0 || z < -1.0) {
    throw DomainError("hyp2f1: z outside [-1, 1] for a non-terminating series");
  }

  const double s = c - a - b;
  if (z == 1.0) {
    if (!(s > 0.0)) throw DomainError("hyp2f1: series diverges at z = 1 when c - a - b <= 0");
    return gamma_ratio(c, s, c - a, c - b);
  }
  if (z < -0.5) {
    // Pfaff: 2F1(a,b;c;z) = (1-z)^-a 2F1(a, c-b; c; z/(z-1)), z/(z-1) in (1/3, 1/2].
    return std::pow(1.0 - z, -a) * series_2f1(a, c - b, c, z / (z - 1.0), policy);
  }
  if (z > 0.9) {
    if (std::abs(s - std::round(s)) > 1e-9) {
      const double w = 1.0 - z;
      const double first = gamma_ratio(c, s, c - a, c - b);
      const double second = gamma_ratio(c, -s, a, b);
      double value = 0.0;
      if (first != 0.0) value += first * series_2f1(a, b, 1.0 - s, w, policy);
      if (second != 0.0) value += std::pow(w, s) * second * series_2f1(c - a, c - b, 1.0 + s, w, policy);
      return value;
    }
    // Integer c - a - b (logarithmic case): Euler transformation and the direct series.
    return std::pow(1.0 - z, s) * series_2f1(c - a, c - b, c, z, policy);
  }
  return series_2f1(a, b, c, z, policy);
}

GetoorPair::GetoorPair(int k, double alpha, int d, EvalPolicy policy)
    : k_(k), alpha_(alpha), d_(d), policy_(policy) {
  if (k < 0) throw DomainError("GetoorPair: k must be >= 0");
  if (!(alpha > 0.0 && alpha < 2.0)) throw DomainError("GetoorPair: alpha must lie in (0, 2)");
  if (d < 1) throw DomainError("GetoorPair: dimension must be >= 1");
  policy_.validate();
  exponent_ = k + alpha / 2.0;
  const double half_d_alpha = (d + alpha) / 2.0;
  interior_prefactor_ = std::tgamma(half_d_alpha) * std::tgamma(k + 1.0 + alpha / 2.0) /
                        (std::pow(2.0, -alpha) * std::tgamma(k + 1.0) * std::tgamma(d / 2.0));
  exterior_prefactor_ = std::pow(2.0, alpha) * std::tgamma(half_d_alpha) *
                        std::tgamma(k + 1.0 + alpha / 2.0) /
                        (std::tgamma(k + 1.0 + half_d_alpha) * gamma_signed(-alpha / 2.0));
}

double GetoorPair::phi(double r2) const {
  const double base = 1.0 - r2;
  return base > 0.0 ? std::pow(base, exponent_) : 0.0;
}

double GetoorPair::psi(double r2) const {
  const double half_d_alpha = (d_ + alpha_) / 2.0;
  if (r2 <= 1.0) {
    return interior_prefactor_ * hyp2f1(half_d_alpha, -static_cast<double>(k_), d_ / 2.0, r2, policy_);
  }
  return exterior_prefactor_ / std::pow(r2, half_d_alpha) *
         hyp2f1(half_d_alpha, (2.0 + alpha_) / 2.0, k_ + 1.0 + half_d_alpha, 1.0 / r2, policy_);
}

double phi_bump(int k, double alpha, std::span<const double> x) {
  if (k < 0) throw DomainError("phi_bump: k must be >= 0");
  if (!(alpha > 0.0 && alpha <= 2.0)) throw DomainError("phi_bump: alpha must lie in (0, 2]");
  double r2 = 0.0;
  for (double xi : x) r2 += xi * xi;
  const double base = 1.0 - r2;
  return base > 0.0 ? std::pow(base, k + alpha / 2.0) : 0.0;
}

double psi_getoor(int k, double alpha, std::span<const double> x, const EvalPolicy& policy) {
  const GetoorPair pair(k, alpha, static_cast<int>(x.size()), policy);
  double r2 = 0.0;
  for (double xi : x) r2 += xi * xi;
  return pair.psi(r2);
}

}  // namespace branchpde::specfun
