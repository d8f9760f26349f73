#include "branchpde/existence.hpp"

#include <algorithm>
#include <cmath>
#include <fmt/format.h>
#include <limits>
#include <numbers>
#include <sstream>

#include "branchpde/errors.hpp"
#include "branchpde/specfun.hpp"
#include "quadrature.hpp"

namespace branchpde::existence {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kFitGuard = bernstein::kFitGuard;

struct StableParams {
  double alpha;
  double kappa;
};

StableParams require_stable(const bernstein::LaplaceExponent& eta) {
  if (!eta.is_stable_type()) {
    throw AdmissibilityError("horizon bounds need a stable-type exponent, got " + eta.describe());
  }
  const double alpha = eta.stable_alpha();
  if (!(alpha > 1.0 && alpha <= 2.0)) {
    throw AdmissibilityError(fmt::format("horizon bounds need alpha in (1, 2], got {}", alpha));
  }
  return {alpha, eta.stable_scale()};
}

// 2 Gamma(p/alpha) / (2^(p/2) alpha Gamma(p/2)) = E[S_1^(-p/2)] of the stable
// subordinator; kappa^(2/alpha) S scales it by kappa^(-p/alpha).
double stable_constant(double p, double alpha, double kappa) {
  return 2.0 * std::tgamma(p / alpha) / (std::pow(2.0, p / 2.0) * alpha * std::tgamma(p / 2.0)) *
         std::pow(kappa, -p / alpha);
}

// (1/q_min^r) sup|c_l|^r max{A_p sup s^(-p/alpha)/rho^r, sup 1/rho^r} for r = p or p - 1.
double circ_constant(const PdeModel& model, const StableParams& s, double delta, double p, double r, double T) {
  const double coeff = std::pow(model.f.max_coeff_sup(), r);
  if (coeff == 0.0) return 0.0;
  const double gamma_r = std::exp(r * std::lgamma(delta));
  const double sup_weighted = gamma_r * sup_power_exp(r * (1.0 - delta) - p / s.alpha, r, T);
  const double sup_plain = gamma_r * sup_power_exp(r * (1.0 - delta), r, T);
  const double inner = std::max(stable_constant(p, s.alpha, s.kappa) * sup_weighted, sup_plain);
  return std::pow(model.q.q_min(), -r) * coeff * inner;
}

double partial_constant(const PdeModel& model, double p, MomentConvention convention) {
  if (!model.phi.lipschitz) {
    throw NotLipschitzError("terminal condition of " + model.name + " is not Lipschitz");
  }
  const double sqrt_d = std::sqrt(static_cast<double>(model.d()));
  return std::max(std::pow(model.phi.sup_norm, p),
                  abs_gaussian_moment(p, convention) * std::pow(*model.phi.lipschitz, p) * sqrt_d);
}

// int_{x0}^inf dx / sum_l |c_l| x^|l|.
double tail_integral(const PolynomialNonlinearity& f, double x0) {
  std::vector<double> c(static_cast<std::size_t>(f.max_degree()) + 1, 0.0);
  for (std::size_t i = 0; i < f.size(); ++i) c[static_cast<std::size_t>(degree(f.indices[i]))] += f.coeff_sup[i];
  if (std::any_of(c.begin(), c.end(), [](double v) { return std::isinf(v); })) return 0.0;
  int n = static_cast<int>(c.size()) - 1;
  while (n >= 0 && c[static_cast<std::size_t>(n)] == 0.0) --n;
  if (n <= 1) return kInf;
  if (x0 == 0.0 && c[0] == 0.0) return kInf;

  const auto integrand = [&](double x) {
    double poly = 0.0;
    for (int j = n; j >= 0; --j) poly = poly * x + c[static_cast<std::size_t>(j)];
    return 1.0 / poly;
  };
  const double mid = std::max(x0, 1.0);
  const double X = mid * 1e8;
  double value = 0.0;
  if (mid > x0) value += detail::integrate(integrand, x0, mid, 1e-12);
  value += detail::integrate([&](double u) { const double x = std::exp(u); return integrand(x) * x; },
                             std::log(mid), std::log(X), 1e-12);
  value += std::pow(X, 1.0 - n) / ((n - 1.0) * c[static_cast<std::size_t>(n)]);
  return value;
}

}  // namespace

double abs_gaussian_moment(double p, MomentConvention convention) {
  if (!(p > 0.0) || !std::isfinite(p)) throw DomainError("abs_gaussian_moment: p must be positive");
  if (convention == MomentConvention::PaperLiteral) {
    return std::pow(2.0, p) * std::tgamma(p + 0.5) / std::sqrt(std::numbers::pi);
  }
  return std::pow(2.0, p / 2.0) * std::tgamma((p + 1.0) / 2.0) / std::sqrt(std::numbers::pi);
}

double sup_power_exp(double a, double b, double T) {
  if (!(T > 0.0)) throw DomainError("sup_power_exp: T must be positive");
  if (a < 0.0) return kInf;
  if (a == 0.0) return b > 0.0 ? std::exp(b * T) : 1.0;
  double s = T;
  if (b < 0.0) s = std::min(T, -a / b);
  return std::exp(a * std::log(s) + b * s);
}

Theorem2Check check_theorem2(const bernstein::LaplaceExponent& eta, double delta, double p, double T,
                             double lambda0) {
  if (!(p >= 1.0) || !std::isfinite(p)) throw DomainError("check_theorem2: p must be >= 1");
  if (!(T > 0.0) || !std::isfinite(T)) throw DomainError("check_theorem2: T must be positive");
  if (!(delta > 0.0)) throw DomainError("check_theorem2: delta must be positive");

  Theorem2Check out;
  out.p = p;
  out.T = T;
  out.delta = delta;
  out.lambda0 = lambda0;

  // rho^(1-p)(s) = Gamma(delta)^(p-1) s^((1-delta)(p-1)) e^((p-1)s)
  const double rho_power = (1.0 - delta) * (p - 1.0);
  const double log_gamma_factor = (p - 1.0) * std::lgamma(delta);
  const auto inverse_rho = [&](double s) {
    return std::exp(log_gamma_factor + rho_power * std::log(s) + (p - 1.0) * s);
  };
  out.cond_rho = rho_power > -1.0;
  out.rho_integral = out.cond_rho ? detail::integrate_singular(inverse_rho, 0.0, T) : kInf;

  // Inner integral: int_0^inf e^(-s eta) lambda^(p/2-1) d lambda = Gamma(p/2) E[S_s^(-p/2)].
  const double gamma_half = std::tgamma(p / 2.0);
  const auto g = [&](double s) {
    return gamma_half * bernstein::neg_moment_numeric(eta, p / 2.0, s) * inverse_rho(s);
  };
  try {
    constexpr double s_lo = 1e-7;
    constexpr double s_hi = 1e-4;
    std::vector<double> xs, ys;
    for (int i = 0; i <= 15; ++i) {
      const double s = s_lo * std::pow(s_hi / s_lo, i / 15.0);
      xs.push_back(std::log(s));
      ys.push_back(std::log(g(s)));
    }
    out.eta_exponent = detail::fit_slope(xs, ys);
    out.eta_inconclusive = std::abs(out.eta_exponent + 1.0) <= kFitGuard;
    out.cond_eta = !out.eta_inconclusive && out.eta_exponent > -1.0 + kFitGuard;
    if (out.cond_eta) {
      const double s0 = std::min(s_lo, T);
      const double head = g(s0) * s0 / (out.eta_exponent + 1.0);
      const double body =
          s0 < T ? detail::integrate([&](double v) { const double s = std::exp(v); return g(s) * s; },
                                     std::log(s0), std::log(T), 1e-8)
                 : 0.0;
      out.eta_integral = head + body;
    } else {
      out.eta_integral = kInf;
    }
  } catch (const DivergenceError&) {
    out.cond_eta = false;
    out.eta_integral = kInf;
  } catch (const DomainError&) {
    out.cond_eta = false;
    out.eta_integral = kInf;
  }

  const auto cd = bernstein::check_integrability_cd(eta, lambda0);
  out.cd_check = cd.converges;
  out.cd_inconclusive = cd.inconclusive;
  out.cd_integral = cd.grid_integral;
  return out;
}

HorizonA horizon_bound_a(const PdeModel& model, const bernstein::LaplaceExponent& eta, double delta, double p,
                         double T, MomentConvention convention) {
  if (!(p >= 1.0)) throw DomainError("horizon_bound_a: p must be >= 1");
  if (!(T > 0.0) || !std::isfinite(T)) throw DomainError("horizon_bound_a: T must be positive");
  const StableParams s = require_stable(eta);
  if (!(delta > 0.0 && delta < 1.0 - 1.0 / s.alpha)) {
    throw AdmissibilityError(fmt::format(
        "horizon_bound_a: need 0 < delta < 1 - 1/alpha = {}, got delta = {} (the sup in C_circ is infinite)",
        1.0 - 1.0 / s.alpha, delta));
  }
  HorizonA out;
  out.C_partial = partial_constant(model, p, convention);
  out.C_circ = circ_constant(model, s, delta, p, p, T);
  out.C_partial_ratio = out.C_partial / std::pow(specfun::upper_reg_gamma(delta, T), p);
  out.certified = out.C_circ <= 1.0 && out.C_partial_ratio <= 1.0;
  return out;
}

HorizonA horizon_bound_a(const PdeModel& model, double p, double T, MomentConvention convention) {
  return horizon_bound_a(model, model.eta, model.rho.delta(), p, T, convention);
}

HorizonB horizon_bound_b(const PdeModel& model, const bernstein::LaplaceExponent& eta, double delta, double p,
                         double T, MomentConvention convention) {
  if (!(p >= 1.0)) throw DomainError("horizon_bound_b: p must be >= 1");
  if (!(T > 0.0) || !std::isfinite(T)) throw DomainError("horizon_bound_b: T must be positive");
  if (!(delta > 0.0)) throw DomainError("horizon_bound_b: delta must be positive");
  const StableParams s = require_stable(eta);
  HorizonB out;
  out.C_tilde = circ_constant(model, s, delta, p, p - 1.0, T);
  const double x0 = partial_constant(model, p, convention) / std::pow(specfun::upper_reg_gamma(delta, T), p - 1.0);
  const double integral = tail_integral(model.f, x0);
  if (std::isinf(integral)) {
    out.bound = kInf;
    out.certified = true;
    return out;
  }
  out.bound = std::isinf(out.C_tilde) ? 0.0 : integral / out.C_tilde;
  out.certified = std::isfinite(out.C_tilde) && T < out.bound;
  return out;
}

HorizonB horizon_bound_b(const PdeModel& model, double p, double T, MomentConvention convention) {
  return horizon_bound_b(model, model.eta, model.rho.delta(), p, T, convention);
}

double max_certified_horizon_a(const PdeModel& model, double p, double T_hi, double tol,
                               MomentConvention convention) {
  const auto certified = [&](double T) { return horizon_bound_a(model, p, T, convention).certified; };
  if (certified(T_hi)) return T_hi;
  double lo = 0.0;
  double hi = T_hi;
  while (hi - lo > tol) {
    const double mid = 0.5 * (lo + hi);
    (certified(mid) ? lo : hi) = mid;
  }
  return lo;
}

std::string to_string(Verdict v) {
  switch (v) {
    case Verdict::CertifiedA:
      return "certified-a";
    case Verdict::CertifiedB:
      return "certified-b";
    case Verdict::Uncertified:
      break;
  }
  return "uncertified";
}

Verdict verdict_from_string(const std::string& s) {
  if (s == "certified-a") return Verdict::CertifiedA;
  if (s == "certified-b") return Verdict::CertifiedB;
  if (s == "uncertified") return Verdict::Uncertified;
  throw ConfigError("unknown verdict '" + s + "'");
}

HorizonReport build_report(const PdeModel& model, double T, const ReportOptions& options) {
  HorizonReport r;
  r.model = model.name;
  r.p = options.p;
  r.m0 = options.m0.value_or(model.m());
  r.T = T;
  r.delta = model.rho.delta();
  r.lambda0 = options.lambda0;
  r.convention = options.convention;
  if (r.m0 < model.m() || r.m0 > model.d()) {
    throw ConfigError(fmt::format("m0 = {} outside [m, d] = [{}, {}]", r.m0, model.m(), model.d()));
  }
  if (!(r.p >= 1.0)) throw ConfigError("p must be >= 1");
  if (!(T > 0.0)) throw ConfigError("T must be positive");
  r.M_p = abs_gaussian_moment(r.p, r.convention);

  const auto t2 = check_theorem2(model.eta, r.delta, r.p, T, r.lambda0);
  r.cond_rho = t2.cond_rho;
  r.cond_rho_value = t2.rho_integral;
  r.cond_eta = t2.cond_eta;
  r.cond_eta_inconclusive = t2.eta_inconclusive;
  r.cond_eta_value = t2.eta_integral;
  r.cd_check = t2.cd_check;
  r.cd_inconclusive = t2.cd_inconclusive;
  r.cd_value = t2.cd_integral;
  if (t2.eta_inconclusive) r.notices.push_back("moment condition on eta is inside the fit guard band");
  if (model.m() == 0) {
    r.notices.push_back("no gradient terms: the lifetime condition alone suffices for the p-th moment");
  }

  bool route_a = false;
  bool route_b = false;
  try {
    const StableParams s = require_stable(model.eta);
    r.C_circ = circ_constant(model, s, r.delta, r.p, r.p, T);
    if (!(r.delta < 1.0 - 1.0 / s.alpha)) {
      r.notices.push_back(fmt::format("delta = {} >= 1 - 1/alpha = {}: C_circ is infinite", r.delta,
                                      1.0 - 1.0 / s.alpha));
    }
    r.C_tilde = circ_constant(model, s, r.delta, r.p, r.p - 1.0, T);
    try {
      const auto a = horizon_bound_a(model, r.p, T, r.convention);
      r.C_partial = a.C_partial;
      r.C_partial_ratio = a.C_partial_ratio;
      route_a = a.certified;
    } catch (const AdmissibilityError&) {
      r.C_partial = partial_constant(model, r.p, r.convention);
      r.C_partial_ratio = r.C_partial / std::pow(model.rho.survival(T), r.p);
    }
    if (r.C_partial > 1.0) {
      r.notices.push_back(fmt::format("C_partial = {} > 1: route (a) cannot certify any T > 0", r.C_partial));
    }
    const auto b = horizon_bound_b(model, r.p, T, r.convention);
    r.t3b_bound = b.bound;
    route_b = b.certified;
    if (std::isinf(b.bound)) r.notices.push_back("every |l| <= 1: the route (b) integral diverges, any T certifies");
  } catch (const NotLipschitzError& e) {
    r.notices.push_back(std::string("not Lipschitz: ") + e.what());
    r.C_partial = kInf;
    r.C_partial_ratio = kInf;
    r.t3b_bound = 0.0;
  } catch (const AdmissibilityError& e) {
    r.notices.push_back(std::string("inadmissible: ") + e.what());
    r.C_circ = kInf;
    r.C_tilde = kInf;
    r.C_partial = kInf;
    r.C_partial_ratio = kInf;
    r.t3b_bound = 0.0;
  }
  r.verdict = route_a ? Verdict::CertifiedA : route_b ? Verdict::CertifiedB : Verdict::Uncertified;
  return r;
}

std::string summarize(const HorizonReport& r) {
  std::ostringstream os;
  os << fmt::format("model {}  p = {}  m0 = {}  T = {}  delta = {}\n", r.model, r.p, r.m0, r.T, r.delta);
  os << fmt::format("  lifetime condition      {}  ({})\n", r.cond_rho ? "ok  " : "fail", r.cond_rho_value);
  os << fmt::format("  moment condition (eta)  {}  ({})\n",
                    r.cond_eta_inconclusive ? "?   " : r.cond_eta ? "ok  " : "fail", r.cond_eta_value);
  os << fmt::format("  tail integral (lambda0 = {})  {}  ({})\n", r.lambda0,
                    r.cd_inconclusive ? "?   " : r.cd_check ? "ok  " : "fail", r.cd_value);
  os << fmt::format("  route a: C_circ = {}  C_partial/Fbar^p = {}\n", r.C_circ, r.C_partial_ratio);
  os << fmt::format("  route b: C_tilde = {}  bound = {}\n", r.C_tilde, r.t3b_bound);
  for (const auto& n : r.notices) os << "  note: " << n << '\n';
  os << "  verdict: " << to_string(r.verdict) << '\n';
  return os.str();
}

}  // namespace branchpde::existence
