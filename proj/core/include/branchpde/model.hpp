#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "branchpde/bernstein.hpp"
#include "branchpde/expression.hpp"
#include "branchpde/rng.hpp"

namespace branchpde {

/// l = (l_0, ..., l_m): powers of u and of the first m partial derivatives.
using MultiIndex = std::vector<int>;

inline int degree(const MultiIndex& l) {
  int n = 0;
  for (int v : l) n += v;
  return n;
}

/// A real function of (t, x): a constant, a compiled expression, or native code.
class ScalarField {
 public:
  using Native = std::function<double(double, std::span<const double>)>;

  ScalarField(double constant = 0.0);
  ScalarField(expr::Expression expression);
  ScalarField(Native fn, std::string description);

  double operator()(double t, std::span<const double> x) const {
    if (constant_) return *constant_;
    if (const auto* e = std::get_if<expr::Expression>(&impl_)) return (*e)(t, x);
    return std::get<Native>(impl_)(t, x);
  }

  std::optional<double> constant() const noexcept { return constant_; }
  /// Source text for expressions and constants; the given description otherwise.
  std::string description() const;

 private:
  std::variant<std::monostate, expr::Expression, Native> impl_;
  std::optional<double> constant_;
  std::string description_;
};

/// f(t, x, u, du/dx_1, ..., du/dx_m) = sum_l c_l(t, x) u^l_0 prod_j (du/dx_j)^l_j.
struct PolynomialNonlinearity {
  int d = 1;
  int m = 0;
  std::vector<MultiIndex> indices;
  std::vector<ScalarField> coeffs;
  /// sup |c_l|; may be +inf when c_l is unbounded.
  std::vector<double> coeff_sup;

  /// Throws ConfigError on shape violations.
  void validate() const;
  std::size_t size() const noexcept { return indices.size(); }
  int max_degree() const;
  double max_coeff_sup() const;
};

struct TerminalCondition {
  ScalarField phi;
  double sup_norm = 0.0;
  /// Lipschitz constant, or nullopt when phi is not Lipschitz.
  std::optional<double> lipschitz;
};

/// Offspring law q on the index set. Strictly positive, sums to 1.
class BranchingLaw {
 public:
  explicit BranchingLaw(std::vector<double> q);
  static BranchingLaw uniform(std::size_t n);

  double q(std::size_t i) const { return q_[i]; }
  const std::vector<double>& probabilities() const noexcept { return q_; }
  double q_min() const noexcept { return q_min_; }
  std::size_t size() const noexcept { return q_.size(); }

  /// Index of the sampled multi-index (inversion of the cumulative table).
  std::size_t sample(RngStream& rng) const;

 private:
  std::vector<double> q_;
  std::vector<double> cdf_;
  double q_min_ = 0.0;
};

/// Gamma lifetime density rho(s) = s^(delta-1) e^-s / Gamma(delta).
class LifetimeDensity {
 public:
  explicit LifetimeDensity(double delta);

  double delta() const noexcept { return delta_; }
  double density(double s) const;
  /// F-bar(z) = P(tau > z).
  double survival(double z) const;
  double sample(RngStream& rng) const;

 private:
  double delta_;
  double log_gamma_delta_;
};

/// Everything the tree needs to represent one PDE.
struct PdeModel {
  std::string name;
  PolynomialNonlinearity f;
  TerminalCondition phi;
  BranchingLaw q;
  LifetimeDensity rho;
  bernstein::LaplaceExponent eta;
  /// Closed-form solution when one is known.
  std::optional<ScalarField> exact;

  int d() const noexcept { return f.d; }
  int m() const noexcept { return f.m; }

  /// Throws ConfigError if the parts do not fit together.
  void validate() const;
};

/// Sampled multi-index of the offspring law.
const MultiIndex& sample_offspring(const PdeModel& model, RngStream& rng);

struct BuiltinParams {
  int d = 1;
  double alpha = 1.5;
  int k = 0;
  double kappa = 1.0;
  /// Coefficient c of linear-test.
  double coefficient = 1.0;
  /// Horizon used for sup norms of time-dependent data.
  double T = 1.0;
  /// Gamma shape; defaults to default_delta(alpha).
  std::optional<double> delta;
};

/// 0.6 (1 - 1/alpha) for alpha > 1, inside the range 0 < delta < 1 - 1/alpha where
/// the weights dx/ds / rho(tau) stay bounded as tau -> 0; 0.5 otherwise.
double default_delta(double alpha);

/// Catalog: "nld", "gradd", "burgers-halfspace", "burgers-cosine", "linear-test".
/// Throws ConfigError for unknown names, AdmissibilityError for parameters
/// the model cannot take (gradient terms need alpha in (1, 2]).
PdeModel builtin_model(const std::string& name, const BuiltinParams& params);

std::vector<std::string> builtin_names();

/// Lipschitz constant of (1 - |x|^2)_+^beta: 2 beta r (1 - r^2)^(beta-1) at
/// r^2 = 1/(2 beta - 1); 2 for beta = 1; nullopt for beta < 1.
std::optional<double> bump_lipschitz(double beta);

struct ModelAudit {
  /// One line per violated bound.
  std::vector<std::string> warnings;
  bool ok() const noexcept { return warnings.empty(); }
};

/// Samples (t, x) uniformly on [0, T] x [-box, box]^d and checks the declared
/// sup norms and Lipschitz constant.
ModelAudit audit_model(const PdeModel& model, double T, int samples = 10'000, double box = 2.0,
                       std::uint64_t seed = 1);

}  // namespace branchpde
