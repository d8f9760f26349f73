#include "branchpde/model.hpp"

#include <algorithm>
#include <cmath>
#include <fmt/format.h>
#include <limits>
#include <numeric>
#include <set>

#include "branchpde/errors.hpp"
#include "branchpde/sampling.hpp"
#include "branchpde/specfun.hpp"

namespace branchpde {

// ---------------------------------------------------------------------------
// ScalarField

ScalarField::ScalarField(double constant) : constant_(constant) {}

ScalarField::ScalarField(expr::Expression expression) : impl_(std::move(expression)) {
  const auto& e = std::get<expr::Expression>(impl_);
  if (e.time_independent() && e.space_independent()) {
    const std::vector<double> origin(static_cast<std::size_t>(e.dimension()), 0.0);
    constant_ = e(0.0, origin);
  }
}

ScalarField::ScalarField(Native fn, std::string description)
    : impl_(std::move(fn)), description_(std::move(description)) {}

std::string ScalarField::description() const {
  if (const auto* e = std::get_if<expr::Expression>(&impl_)) return e->to_string();
  if (std::holds_alternative<Native>(impl_)) return description_;
  return fmt::format("{}", constant_.value_or(0.0));
}

// ---------------------------------------------------------------------------
// PolynomialNonlinearity

void PolynomialNonlinearity::validate() const {
  if (d < 1) throw ConfigError("nonlinearity: d must be positive");
  if (m < 0 || m > d) throw ConfigError(fmt::format("nonlinearity: m = {} outside [0, d = {}]", m, d));
  if (indices.empty()) throw ConfigError("nonlinearity: the index set is empty");
  if (coeffs.size() != indices.size() || coeff_sup.size() != indices.size()) {
    throw ConfigError("nonlinearity: indices, coefficients and sup norms differ in length");
  }
  std::set<MultiIndex> seen;
  for (std::size_t i = 0; i < indices.size(); ++i) {
    const auto& l = indices[i];
    if (static_cast<int>(l.size()) != m + 1) {
      throw ConfigError(fmt::format("nonlinearity: index {} has {} entries, expected m + 1 = {}", i,
                                    l.size(), m + 1));
    }
    if (std::any_of(l.begin(), l.end(), [](int v) { return v < 0; })) {
      throw ConfigError(fmt::format("nonlinearity: index {} has a negative entry", i));
    }
    if (!seen.insert(l).second) throw ConfigError(fmt::format("nonlinearity: index {} is repeated", i));
    if (!(coeff_sup[i] >= 0.0)) throw ConfigError(fmt::format("nonlinearity: sup norm {} is invalid", i));
  }
}

int PolynomialNonlinearity::max_degree() const {
  int n = 0;
  for (const auto& l : indices) n = std::max(n, degree(l));
  return n;
}

double PolynomialNonlinearity::max_coeff_sup() const {
  return coeff_sup.empty() ? 0.0 : *std::max_element(coeff_sup.begin(), coeff_sup.end());
}

// ---------------------------------------------------------------------------
// BranchingLaw, LifetimeDensity

BranchingLaw::BranchingLaw(std::vector<double> q) : q_(std::move(q)) {
  if (q_.empty()) throw ConfigError("branching law: empty");
  double total = 0.0;
  for (double v : q_) {
    if (!(v > 0.0 && v <= 1.0)) throw ConfigError(fmt::format("branching law: q = {} not in (0, 1]", v));
    total += v;
  }
  if (std::abs(total - 1.0) > 1e-12) {
    throw ConfigError(fmt::format("branching law: probabilities sum to {}, not 1", total));
  }
  cdf_.resize(q_.size());
  std::partial_sum(q_.begin(), q_.end(), cdf_.begin());
  cdf_.back() = 1.0;
  q_min_ = *std::min_element(q_.begin(), q_.end());
}

BranchingLaw BranchingLaw::uniform(std::size_t n) {
  if (n == 0) throw ConfigError("branching law: empty");
  return BranchingLaw(std::vector<double>(n, 1.0 / static_cast<double>(n)));
}

std::size_t BranchingLaw::sample(RngStream& rng) const { return sample_category(cdf_, rng); }

LifetimeDensity::LifetimeDensity(double delta) : delta_(delta) {
  if (!(delta > 0.0) || !std::isfinite(delta)) throw ConfigError("lifetime density: delta must be positive");
  log_gamma_delta_ = std::lgamma(delta);
}

double LifetimeDensity::density(double s) const {
  if (s < 0.0) return 0.0;
  if (s == 0.0) {
    if (delta_ < 1.0) return std::numeric_limits<double>::infinity();
    return delta_ == 1.0 ? 1.0 : 0.0;
  }
  return std::exp((delta_ - 1.0) * std::log(s) - s - log_gamma_delta_);
}

double LifetimeDensity::survival(double z) const { return specfun::upper_reg_gamma(delta_, z); }

double LifetimeDensity::sample(RngStream& rng) const { return sample_lifetime(delta_, rng); }

// ---------------------------------------------------------------------------
// PdeModel

void PdeModel::validate() const {
  f.validate();
  if (q.size() != f.size()) {
    throw ConfigError(fmt::format("model {}: {} offspring probabilities for {} indices", name, q.size(),
                                  f.size()));
  }
  if (!(phi.sup_norm >= 0.0)) throw ConfigError("terminal condition: sup norm must be non-negative");
  if (phi.lipschitz && !(*phi.lipschitz >= 0.0)) {
    throw ConfigError("terminal condition: Lipschitz constant must be non-negative");
  }
}

const MultiIndex& sample_offspring(const PdeModel& model, RngStream& rng) {
  return model.f.indices[model.q.sample(rng)];
}

// ---------------------------------------------------------------------------
// Builtin catalog

double default_delta(double alpha) { return alpha > 1.0 ? 0.6 * (1.0 - 1.0 / alpha) : 0.5; }

std::optional<double> bump_lipschitz(double beta) {
  if (beta < 1.0) return std::nullopt;
  if (beta == 1.0) return 2.0;
  const double r2 = 1.0 / (2.0 * beta - 1.0);
  return 2.0 * beta * std::sqrt(r2) * std::pow(1.0 - r2, beta - 1.0);
}

std::vector<std::string> builtin_names() {
  return {"nld", "gradd", "burgers-halfspace", "burgers-cosine", "linear-test"};
}

namespace {

expr::Expression compile(const std::string& src, int d) { return expr::Expression::parse(src, d); }

std::string coordinate_sum(int d) {
  std::string s;
  for (int j = 1; j <= d; ++j) s += fmt::format("{}x{}", j > 1 ? " + " : "", j);
  return s;
}

// sup over t in [0, T], r >= 0 of |g(t, r)| on a grid dense near r = 1, with a
// relative safety margin for the grid error.
template <class G>
double radial_sup(G&& g, double T) {
  std::vector<double> radii;
  for (int i = 0; i <= 4000; ++i) radii.push_back(4.0 * i / 4000.0);
  for (int i = 1; i <= 200; ++i) {
    const double h = std::pow(10.0, -8.0 + 6.0 * i / 200.0);
    radii.push_back(1.0 - h);
    radii.push_back(1.0 + h);
  }
  double sup = 0.0;
  for (int j = 0; j <= 40; ++j) {
    const double t = T * j / 40.0;
    for (double r : radii) sup = std::max(sup, std::abs(g(t, r)));
  }
  return sup * (1.0 + 1e-3);
}

void require_alpha(const std::string& name, double alpha, double lo, bool lo_open, double hi, bool hi_open) {
  const bool ok = (lo_open ? alpha > lo : alpha >= lo) && (hi_open ? alpha < hi : alpha <= hi);
  if (!ok) {
    throw AdmissibilityError(fmt::format("{}: alpha = {} outside {}{}, {}{}", name, alpha, lo_open ? "(" : "[",
                                         lo, hi, hi_open ? ")" : "]"));
  }
}

PdeModel make_model(std::string name, PolynomialNonlinearity f, TerminalCondition phi,
                    bernstein::LaplaceExponent eta, double delta, std::optional<ScalarField> exact) {
  const std::size_t n = f.size();
  PdeModel model{std::move(name), std::move(f),   std::move(phi),  BranchingLaw::uniform(n),
                 LifetimeDensity(delta), std::move(eta), std::move(exact)};
  model.validate();
  return model;
}

PdeModel make_nld(const BuiltinParams& p) {
  require_alpha("nld", p.alpha, 0.0, true, 2.0, true);
  const double beta = p.k + p.alpha / 2.0;
  const specfun::GetoorPair getoor(p.k, p.alpha, p.d);

  PolynomialNonlinearity f;
  f.d = p.d;
  f.m = 0;
  f.indices = {{0}, {1}, {4}};
  f.coeffs = {
      compile(fmt::format("exp(-t)*psi_getoor({}, {}) - exp(-4*t)*pospart(1 - norm2())^{}", p.k, p.alpha,
                          4.0 * beta),
              p.d),
      ScalarField(1.0), ScalarField(1.0)};
  const double c0_sup =
      getoor.exterior_singular()
          ? std::numeric_limits<double>::infinity()
          : radial_sup(
                [&](double t, double r) {
                  const double r2 = r * r;
                  return std::exp(-t) * getoor.psi(r2) - std::exp(-4.0 * t) * std::pow(getoor.phi(r2), 4.0);
                },
                p.T);
  f.coeff_sup = {c0_sup, 1.0, 1.0};

  TerminalCondition phi{compile(fmt::format("exp(-{})*phi_bump({}, {})", p.T, p.k, p.alpha), p.d),
                        std::exp(-p.T), std::nullopt};
  if (auto lip = bump_lipschitz(beta)) phi.lipschitz = std::exp(-p.T) * *lip;

  return make_model("nld", std::move(f), std::move(phi), bernstein::LaplaceExponent::stable(p.alpha),
                    p.delta.value_or(default_delta(p.alpha)),
                    compile(fmt::format("exp(-t)*phi_bump({}, {})", p.k, p.alpha), p.d));
}

PdeModel make_gradd(const BuiltinParams& p) {
  require_alpha("gradd", p.alpha, 1.0, true, 2.0, true);
  const double beta = p.k + p.alpha / 2.0;
  const double a = 2.0 * p.k + p.alpha;
  const specfun::GetoorPair getoor(p.k, p.alpha, p.d);

  PolynomialNonlinearity f;
  f.d = p.d;
  f.m = p.d;
  MultiIndex zero(static_cast<std::size_t>(p.d + 1), 0);
  MultiIndex linear = zero;
  linear[0] = 1;
  f.indices = {zero, linear};
  f.coeffs = {compile(fmt::format("exp(-t)*psi_getoor({}, {}) + {}*exp(-2*t)*pospart(1 - norm2())^{}*({})",
                                  p.k, p.alpha, a, a - 1.0, coordinate_sum(p.d)),
                      p.d),
              ScalarField(1.0)};
  for (int j = 1; j <= p.d; ++j) {
    MultiIndex l = linear;
    l[static_cast<std::size_t>(j)] = 1;
    f.indices.push_back(l);
    f.coeffs.emplace_back(1.0);
  }
  // |sum_j x_j| <= sqrt(d) r with equality on the diagonal.
  const double sqrt_d = std::sqrt(static_cast<double>(p.d));
  const double c0_sup =
      getoor.exterior_singular()
          ? std::numeric_limits<double>::infinity()
          : radial_sup(
                [&](double t, double r) {
                  const double r2 = r * r;
                  const double drift = r2 < 1.0 ? a * std::exp(-2.0 * t) * std::pow(1.0 - r2, a - 1.0) * sqrt_d * r
                                                : 0.0;
                  return std::abs(std::exp(-t) * getoor.psi(r2)) + drift;
                },
                p.T);
  f.coeff_sup.assign(f.indices.size(), 1.0);
  f.coeff_sup[0] = c0_sup;

  TerminalCondition phi{compile(fmt::format("exp(-{})*phi_bump({}, {})", p.T, p.k, p.alpha), p.d),
                        std::exp(-p.T), std::nullopt};
  if (auto lip = bump_lipschitz(beta)) phi.lipschitz = std::exp(-p.T) * *lip;

  return make_model("gradd", std::move(f), std::move(phi), bernstein::LaplaceExponent::stable(p.alpha),
                    p.delta.value_or(default_delta(p.alpha)),
                    compile(fmt::format("exp(-t)*phi_bump({}, {})", p.k, p.alpha), p.d));
}

PdeModel make_burgers(const std::string& name, const BuiltinParams& p, bool cosine) {
  require_alpha(name, p.alpha, 1.0, true, 2.0, false);
  if (!(p.kappa > 0.0)) throw ConfigError(fmt::format("{}: kappa must be positive", name));

  PolynomialNonlinearity f;
  f.d = p.d;
  f.m = p.d;
  for (int j = 1; j <= p.d; ++j) {
    MultiIndex l(static_cast<std::size_t>(p.d + 1), 0);
    l[0] = 1;
    l[static_cast<std::size_t>(j)] = 1;
    f.indices.push_back(l);
    f.coeffs.emplace_back(-1.0);
    f.coeff_sup.push_back(1.0);
  }

  TerminalCondition phi;
  if (cosine) {
    std::string src;
    for (int j = 1; j <= p.d; ++j) src += fmt::format("cos(x{})*", j);
    src += "indicator_box(-pi/2, pi/2)";
    phi = {compile(src, p.d), 1.0, 1.0};
  } else {
    phi = {compile("step(x1)", p.d), 1.0, std::nullopt};
  }
  return make_model(name, std::move(f), std::move(phi), bernstein::LaplaceExponent::scaled_stable(p.alpha, p.kappa),
                    p.delta.value_or(default_delta(p.alpha)), std::nullopt);
}

PdeModel make_linear(const BuiltinParams& p) {
  require_alpha("linear-test", p.alpha, 0.0, true, 2.0, false);
  if (!std::isfinite(p.coefficient)) throw ConfigError("linear-test: coefficient must be finite");
  PolynomialNonlinearity f;
  f.d = p.d;
  f.m = 0;
  f.indices = {{1}};
  f.coeffs = {ScalarField(p.coefficient)};
  f.coeff_sup = {std::abs(p.coefficient)};
  TerminalCondition phi{ScalarField(1.0), 1.0, 0.0};
  return make_model("linear-test", std::move(f), std::move(phi), bernstein::LaplaceExponent::stable(p.alpha),
                    p.delta.value_or(default_delta(p.alpha)),
                    compile(fmt::format("exp({}*({} - t))", p.coefficient, p.T), p.d));
}

}  // namespace

PdeModel builtin_model(const std::string& name, const BuiltinParams& params) {
  if (params.d < 1) throw ConfigError("builtin model: d must be positive");
  if (params.k < 0) throw ConfigError("builtin model: k must be non-negative");
  if (!(params.T > 0.0) || !std::isfinite(params.T)) throw ConfigError("builtin model: T must be positive");
  if (name == "nld") return make_nld(params);
  if (name == "gradd") return make_gradd(params);
  if (name == "burgers-halfspace") return make_burgers(name, params, false);
  if (name == "burgers-cosine") return make_burgers(name, params, true);
  if (name == "linear-test") return make_linear(params);
  std::string known;
  for (const auto& n : builtin_names()) known += (known.empty() ? "" : ", ") + n;
  throw ConfigError(fmt::format("unknown model '{}' (known: {})", name, known));
}

// ---------------------------------------------------------------------------
// Audit

ModelAudit audit_model(const PdeModel& model, double T, int samples, double box, std::uint64_t seed) {
  ModelAudit audit;
  const auto d = static_cast<std::size_t>(model.d());
  RngStream rng(seed, 0);
  std::vector<double> x(d), y(d);
  const auto draw_point = [&](std::vector<double>& p) {
    for (double& v : p) v = box * (2.0 * rng.uniform() - 1.0);
  };

  std::vector<double> worst(model.f.size(), 0.0);
  double phi_worst = 0.0;
  double lip_worst = 0.0;
  for (int i = 0; i < samples; ++i) {
    const double t = T * rng.uniform();
    draw_point(x);
    for (std::size_t l = 0; l < model.f.size(); ++l) {
      try {
        worst[l] = std::max(worst[l], std::abs(model.f.coeffs[l](t, x)));
      } catch (const EvaluationError& e) {
        audit.warnings.push_back(fmt::format("coefficient {} fails to evaluate: {}", l, e.what()));
      }
    }
    const double phi_x = model.phi.phi(T, x);
    phi_worst = std::max(phi_worst, std::abs(phi_x));
    if (model.phi.lipschitz) {
      // Alternate far pairs and close pairs.
      if (i % 2 == 0) {
        draw_point(y);
      } else {
        for (std::size_t j = 0; j < d; ++j) y[j] = x[j] + 1e-3 * rng.normal();
      }
      double dist2 = 0.0;
      for (std::size_t j = 0; j < d; ++j) dist2 += (x[j] - y[j]) * (x[j] - y[j]);
      if (dist2 > 0.0) lip_worst = std::max(lip_worst, std::abs(phi_x - model.phi.phi(T, y)) / std::sqrt(dist2));
    }
  }
  constexpr double kSlack = 1e-9;
  for (std::size_t l = 0; l < model.f.size(); ++l) {
    if (worst[l] > model.f.coeff_sup[l] * (1.0 + kSlack) + kSlack) {
      audit.warnings.push_back(fmt::format("coefficient {}: sampled |c| = {} exceeds declared sup {}", l,
                                           worst[l], model.f.coeff_sup[l]));
    }
  }
  if (phi_worst > model.phi.sup_norm * (1.0 + kSlack) + kSlack) {
    audit.warnings.push_back(fmt::format("terminal condition: sampled |phi| = {} exceeds declared sup {}",
                                         phi_worst, model.phi.sup_norm));
  }
  if (model.phi.lipschitz && lip_worst > *model.phi.lipschitz * (1.0 + 1e-6) + kSlack) {
    audit.warnings.push_back(fmt::format("terminal condition: sampled difference quotient {} exceeds L = {}",
                                         lip_worst, *model.phi.lipschitz));
  }
  return audit;
}

}  // namespace branchpde
