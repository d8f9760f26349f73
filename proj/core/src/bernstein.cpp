#include "branchpde/bernstein.hpp"

#include <boost/math/special_functions/gamma.hpp>
#include <cmath>
#include <fmt/format.h>
#include <limits>
#include <numbers>
#include <sstream>

#include "branchpde/errors.hpp"
#include "quadrature.hpp"

namespace branchpde::bernstein {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

void require(bool condition, const char* message) {
  if (!condition) throw DomainError(message);
}

void validate(const LaplaceExponent::Family& family) {
  std::visit(
      overloaded{
          [](const Stable& f) { require(f.alpha > 0 && f.alpha <= 2, "Stable: alpha must lie in (0, 2]"); },
          [](const ScaledStable& f) {
            require(f.alpha > 0 && f.alpha <= 2, "ScaledStable: alpha must lie in (0, 2]");
            require(f.kappa > 0 && std::isfinite(f.kappa), "ScaledStable: kappa must be positive");
          },
          [](const StableWithDrift& f) {
            require(f.alpha > 0 && f.alpha < 1, "StableWithDrift: alpha must lie in (0, 1)");
            require(f.mu > 0 && f.c > 0, "StableWithDrift: mu and c must be positive");
            require(f.kill >= 0, "StableWithDrift: kill rate must be non-negative");
          },
          [](const SumOfStables& f) {
            require(f.a > 0 && f.b > 0, "SumOfStables: a and b must be positive");
            require(0 < f.alpha && f.alpha < f.beta && f.beta < 1,
                    "SumOfStables: need 0 < alpha < beta < 1");
          },
          [](const BetaRatio& f) {
            require(f.c > 0, "BetaRatio: c must be positive");
            require(f.nu >= 0, "BetaRatio: nu must be non-negative");
            require(f.mu > 0 && f.mu < 1, "BetaRatio: mu must lie in (0, 1)");
          },
          [](const Relativistic& f) {
            require(f.alpha > 0 && f.alpha < 2, "Relativistic: alpha must lie in (0, 2)");
            require(f.m > 0, "Relativistic: m must be positive");
          },
          [](const LogCorrected& f) {
            require(f.alpha > 0 && f.alpha < 2, "LogCorrected: alpha must lie in (0, 2)");
            require(f.sign == 1 || f.sign == -1, "LogCorrected: sign must be +1 or -1");
            const double upper = f.sign > 0 ? 2.0 - f.alpha : f.alpha;
            require(f.beta > 0 && f.beta < upper,
                    "LogCorrected: beta must lie in (0, 2 - alpha) for sign +1, (0, alpha) for -1");
          },
      },
      family);
}

// Levy density of the (gamma)-stable subordinator lambda^gamma, gamma in (0, 1).
double stable_density(double gamma, double y) {
  return gamma / std::tgamma(1.0 - gamma) * std::pow(y, -1.0 - gamma);
}

}  // namespace

LaplaceExponent::LaplaceExponent(Family family) : family_(family) { validate(family_); }

double LaplaceExponent::operator()(double lambda) const {
  if (!(lambda >= 0.0)) throw DomainError("eval_eta: lambda must be non-negative");
  return std::visit(
      overloaded{
          [&](const Stable& f) { return std::pow(2.0 * lambda, f.alpha / 2.0); },
          [&](const ScaledStable& f) { return f.kappa * std::pow(2.0 * lambda, f.alpha / 2.0); },
          [&](const StableWithDrift& f) {
            return f.kill + f.mu * lambda + f.c * std::pow(lambda, f.alpha);
          },
          [&](const SumOfStables& f) {
            return f.a * std::pow(lambda, f.beta - f.alpha) + f.b * std::pow(lambda, f.beta);
          },
          [&](const BetaRatio& f) {
            // Direct ratio: differencing lgamma loses ~1e-6 relative accuracy at lambda ~ 1e9.
            if (f.nu == 0.0) {
              // lambda Gamma(lambda) = Gamma(lambda + 1)
              return f.c / boost::math::tgamma_delta_ratio(lambda + f.mu, 1.0 - f.mu);
            }
            return f.c * lambda * boost::math::tgamma_delta_ratio(lambda + f.nu, f.mu);
          },
          [&](const Relativistic& f) {
            const double theta = std::pow(f.m, 2.0 / f.alpha);
            return f.m * std::expm1(f.alpha / 2.0 * std::log1p(lambda / theta));
          },
          [&](const LogCorrected& f) {
            if (lambda == 0.0) return 0.0;
            return std::pow(lambda, f.alpha / 2.0) * std::pow(std::log1p(lambda), f.sign * f.beta / 2.0);
          },
      },
      family_);
}

std::string LaplaceExponent::name() const {
  return std::visit(overloaded{
                        [](const Stable&) { return std::string("stable"); },
                        [](const ScaledStable&) { return std::string("scaled-stable"); },
                        [](const StableWithDrift&) { return std::string("stable-with-drift"); },
                        [](const SumOfStables&) { return std::string("sum-of-stables"); },
                        [](const BetaRatio&) { return std::string("beta-ratio"); },
                        [](const Relativistic&) { return std::string("relativistic"); },
                        [](const LogCorrected& f) {
                          return std::string(f.sign > 0 ? "log-corrected+" : "log-corrected-");
                        },
                    },
                    family_);
}

std::string LaplaceExponent::describe() const {
  return std::visit(
      overloaded{
          [](const Stable& f) { return fmt::format("stable(alpha={})", f.alpha); },
          [](const ScaledStable& f) {
            return fmt::format("scaled-stable(alpha={}, kappa={})", f.alpha, f.kappa);
          },
          [](const StableWithDrift& f) {
            return fmt::format("stable-with-drift(alpha={}, mu={}, c={}, kill={})", f.alpha, f.mu, f.c,
                               f.kill);
          },
          [](const SumOfStables& f) {
            return fmt::format("sum-of-stables(a={}, b={}, alpha={}, beta={})", f.a, f.b, f.alpha, f.beta);
          },
          [](const BetaRatio& f) { return fmt::format("beta-ratio(c={}, nu={}, mu={})", f.c, f.nu, f.mu); },
          [](const Relativistic& f) { return fmt::format("relativistic(alpha={}, m={})", f.alpha, f.m); },
          [](const LogCorrected& f) {
            return fmt::format("log-corrected(alpha={}, beta={}, sign={})", f.alpha, f.beta, f.sign);
          },
      },
      family_);
}

double LaplaceExponent::kill_rate() const {
  if (const auto* f = std::get_if<StableWithDrift>(&family_)) return f->kill;
  if (const auto* f = std::get_if<BetaRatio>(&family_)) {
    return f->nu == 0.0 ? f->c / std::tgamma(f->mu) : 0.0;
  }
  return 0.0;
}

double LaplaceExponent::drift() const {
  if (const auto* f = std::get_if<Stable>(&family_)) return f->alpha == 2.0 ? 2.0 : 0.0;
  if (const auto* f = std::get_if<ScaledStable>(&family_)) return f->alpha == 2.0 ? 2.0 * f->kappa : 0.0;
  if (const auto* f = std::get_if<StableWithDrift>(&family_)) return f->mu;
  return 0.0;
}

std::optional<double> LaplaceExponent::levy_density(double y) const {
  if (!(y > 0.0)) throw DomainError("levy_density: y must be positive");
  return std::visit(
      overloaded{
          [&](const Stable& f) -> std::optional<double> {
            if (f.alpha == 2.0) return 0.0;
            return std::pow(2.0, f.alpha / 2.0) * stable_density(f.alpha / 2.0, y);
          },
          [&](const ScaledStable& f) -> std::optional<double> {
            if (f.alpha == 2.0) return 0.0;
            return f.kappa * std::pow(2.0, f.alpha / 2.0) * stable_density(f.alpha / 2.0, y);
          },
          [&](const StableWithDrift& f) -> std::optional<double> { return f.c * stable_density(f.alpha, y); },
          [&](const SumOfStables& f) -> std::optional<double> {
            return f.a * stable_density(f.beta - f.alpha, y) + f.b * stable_density(f.beta, y);
          },
          [&](const Relativistic& f) -> std::optional<double> {
            const double theta = std::pow(f.m, 2.0 / f.alpha);
            return std::exp(-theta * y) * stable_density(f.alpha / 2.0, y);
          },
          [](const BetaRatio&) -> std::optional<double> { return std::nullopt; },
          [](const LogCorrected&) -> std::optional<double> { return std::nullopt; },
      },
      family_);
}

bool LaplaceExponent::is_stable_type() const noexcept {
  return std::holds_alternative<Stable>(family_) || std::holds_alternative<ScaledStable>(family_);
}

double LaplaceExponent::stable_alpha() const {
  if (const auto* f = std::get_if<Stable>(&family_)) return f->alpha;
  if (const auto* f = std::get_if<ScaledStable>(&family_)) return f->alpha;
  throw DomainError("stable_alpha: " + name() + " is not a stable-type exponent");
}

double LaplaceExponent::stable_scale() const {
  if (std::holds_alternative<Stable>(family_)) return 1.0;
  if (const auto* f = std::get_if<ScaledStable>(&family_)) return f->kappa;
  throw DomainError("stable_scale: " + name() + " is not a stable-type exponent");
}

double eval_eta(const LaplaceExponent& eta, double lambda) { return eta(lambda); }

BernsteinAudit audit_bernstein(const LaplaceExponent& eta) {
  BernsteinAudit audit{};
  audit.value_near_zero = eta(1e-12);
  audit.kill_rate = eta.kill_rate();
  if (audit.kill_rate == 0.0) {
    // Power-law decay towards 0: positive log-log slope between 1e-12 and 1e-9.
    const double slope = std::log(eta(1e-9) / audit.value_near_zero) / std::log(1e3);
    audit.vanishes_at_zero = slope > 0.005;
  }

  std::vector<double> lambdas, values;
  for (int i = -60; i <= 60; ++i) {
    const double lambda = std::pow(10.0, i / 10.0);
    lambdas.push_back(lambda);
    values.push_back(eta(lambda));
  }
  audit.nondecreasing = true;
  audit.concave = true;
  double previous_slope = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i + 1 < lambdas.size(); ++i) {
    if (values[i + 1] < values[i] * (1.0 - 1e-12)) audit.nondecreasing = false;
    const double slope = (values[i + 1] - values[i]) / (lambdas[i + 1] - lambdas[i]);
    if (slope > previous_slope * (1.0 + 1e-8) + 1e-300) audit.concave = false;
    previous_slope = slope;
  }
  return audit;
}

IntegrabilityVerdict check_integrability_cd(const LaplaceExponent& eta, double lambda0) {
  if (!(lambda0 > 0.0 && lambda0 < 1e6)) {
    throw DomainError("check_integrability_cd: lambda0 must lie in (0, 1e6)");
  }
  constexpr double kGridTop = 1e9;
  const auto integrand = [&](double lambda) { return 1.0 / (eta(lambda) * std::sqrt(lambda)); };

  std::vector<double> log_lambda, log_value;
  for (int i = 0; i <= 30; ++i) {
    const double lambda = 1e6 * std::pow(10.0, i / 10.0);
    log_lambda.push_back(std::log(lambda));
    log_value.push_back(std::log(integrand(lambda)));
  }

  IntegrabilityVerdict verdict;
  verdict.lambda0 = lambda0;
  verdict.fitted_exponent = detail::fit_slope(log_lambda, log_value);
  verdict.inconclusive = std::abs(verdict.fitted_exponent + 1.0) <= kFitGuard;
  verdict.converges = !verdict.inconclusive && verdict.fitted_exponent < -1.0 - kFitGuard;
  verdict.grid_integral = detail::integrate(
      [&](double u) {
        const double lambda = std::exp(u);
        return integrand(lambda) * lambda;
      },
      std::log(lambda0), std::log(kGridTop), 1e-10);
  return verdict;
}

IntegrabilityVerdict require_integrability_cd(const LaplaceExponent& eta, double lambda0) {
  auto verdict = check_integrability_cd(eta, lambda0);
  if (verdict.inconclusive) {
    throw InconclusiveError(fmt::format(
        "integrability of 1/(eta sqrt(lambda)) for {} is inconclusive: fitted exponent {:.4f}",
        eta.describe(), verdict.fitted_exponent));
  }
  return verdict;
}

std::vector<TableRow> integrability_table(double lambda0) {
  std::vector<TableRow> rows;
  const auto add_case = [&](TableRow& row, std::string parameters, LaplaceExponent eta, bool expected) {
    auto verdict = check_integrability_cd(eta, lambda0);
    row.cases.push_back(TableCase{std::move(parameters), std::move(eta), expected, verdict});
  };

  {
    TableRow row{"a lambda^(beta-alpha) + b lambda^beta", "a,b > 0, 0 < alpha < beta < 1",
                 "0 < max(alpha, 1/2) < beta < 1", {}};
    add_case(row, "a=1 b=1 alpha=0.2 beta=0.55", LaplaceExponent(SumOfStables{1, 1, 0.2, 0.55}), true);
    add_case(row, "a=1 b=1 alpha=0.2 beta=0.45", LaplaceExponent(SumOfStables{1, 1, 0.2, 0.45}), false);
    rows.push_back(std::move(row));
  }
  {
    TableRow row{"kappa + mu lambda + c lambda^alpha", "alpha in (0,1), mu > 0, kappa, c > 0",
                 "always satisfied", {}};
    add_case(row, "alpha=0.5 mu=1 c=1 kappa=0.1", LaplaceExponent(StableWithDrift{0.5, 1, 1, 0.1}), true);
    add_case(row, "alpha=0.9 mu=0.1 c=2 kappa=1", LaplaceExponent(StableWithDrift{0.9, 0.1, 2, 1}), true);
    rows.push_back(std::move(row));
  }
  {
    TableRow row{"c lambda B(lambda+nu, mu) / Gamma(mu)", "c > 0, nu >= 0, mu in (0,1)",
                 "0 < mu < 1/2", {}};
    add_case(row, "c=1 nu=0 mu=0.45", LaplaceExponent(BetaRatio{1, 0, 0.45}), true);
    add_case(row, "c=1 nu=0 mu=0.55", LaplaceExponent(BetaRatio{1, 0, 0.55}), false);
    rows.push_back(std::move(row));
  }
  {
    TableRow row{"(lambda + m^(2/alpha))^(alpha/2) - m", "alpha in (0,2), m > 0", "1 < alpha < 2", {}};
    add_case(row, "alpha=1.1 m=1", LaplaceExponent(Relativistic{1.1, 1}), true);
    add_case(row, "alpha=0.9 m=1", LaplaceExponent(Relativistic{0.9, 1}), false);
    rows.push_back(std::move(row));
  }
  {
    TableRow row{"lambda^(alpha/2) log(1+lambda)^(beta/2)", "alpha in (0,2), beta in (0, 2-alpha)",
                 "1 < alpha < 2", {}};
    add_case(row, "alpha=1.1 beta=0.4", LaplaceExponent(LogCorrected{1.1, 0.4, 1}), true);
    add_case(row, "alpha=0.9 beta=0.4", LaplaceExponent(LogCorrected{0.9, 0.4, 1}), false);
    rows.push_back(std::move(row));
  }
  {
    TableRow row{"lambda^(alpha/2) log(1+lambda)^(-beta/2)", "alpha in (0,2), beta in (0, alpha)",
                 "1 < alpha < 2", {}};
    add_case(row, "alpha=1.1 beta=0.4", LaplaceExponent(LogCorrected{1.1, 0.4, -1}), true);
    add_case(row, "alpha=0.9 beta=0.4", LaplaceExponent(LogCorrected{0.9, 0.4, -1}), false);
    rows.push_back(std::move(row));
  }
  return rows;
}

double neg_moment_stable(double p, double alpha, double t) {
  if (!(p > 0.0) || !std::isfinite(p)) throw DomainError("neg_moment_stable: p must be positive");
  if (!(alpha > 0.0 && alpha <= 2.0)) throw DomainError("neg_moment_stable: alpha must lie in (0, 2]");
  if (!(t > 0.0) || !std::isfinite(t)) throw DomainError("neg_moment_stable: t must be positive");
  const double q = 2.0 * p / alpha;
  return std::exp((1.0 - p) * std::numbers::ln2 + std::lgamma(q) - std::log(alpha) - q * std::log(t) -
                  std::lgamma(p));
}

double neg_moment_numeric(const LaplaceExponent& eta, double p, double t) {
  if (!(p > 0.0) || !std::isfinite(p)) throw DomainError("neg_moment_numeric: p must be positive");
  if (!(t > 0.0) || !std::isfinite(t)) throw DomainError("neg_moment_numeric: t must be positive");

  const auto exponent = [&](double u) { return t * eta(std::exp(u)); };
  constexpr double kUMin = -700.0;
  constexpr double kUMax = 700.0;
  if (exponent(kUMax) < 1.0) {
    throw DomainError("neg_moment_numeric: t eta(lambda) stays below 1; integral diverges");
  }

  // Split point u* with t eta(e^u*) = 1.
  double lo = kUMin;
  double hi = kUMax;
  if (exponent(lo) >= 1.0) {
    hi = lo;
  } else {
    for (int i = 0; i < 200 && hi - lo > 1e-12; ++i) {
      const double mid = 0.5 * (lo + hi);
      (exponent(mid) < 1.0 ? lo : hi) = mid;
    }
  }
  const double u_star = hi;

  // Integrand in u = log(lambda), scaled by exp(-p u*) to keep it O(1) near the split.
  const auto integrand = [&](double u) { return std::exp(-exponent(u) + p * (u - u_star)); };

  // Upper cut: the integrand has fallen below 1e-40 of its value at u*.
  double u_hi = u_star;
  do {
    u_hi += 1.0;
    if (u_hi > kUMax) {
      throw DivergenceError("neg_moment_numeric: integrand tail does not decay; eta grows too slowly");
    }
  } while (-exponent(u_hi) + p * (u_hi - u_star) > -92.0);
  const double u_lo = std::max(kUMin, u_star - 92.0 / p);

  const double value = detail::integrate(integrand, u_lo, u_star, 1e-13) +
                       detail::integrate(integrand, u_star, u_hi, 1e-13);
  return std::exp(p * u_star - std::lgamma(p)) * value;
}

}  // namespace branchpde::bernstein
