#pragma once

#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace branchpde::bernstein {

// Families of Bernstein functions. Parameter names follow the usual
// conventions of each family; ranges are enforced by LaplaceExponent.

/// (2 lambda)^(alpha/2), alpha in (0, 2]. Generator of the fractional Laplacian.
struct Stable {
  double alpha;
};

/// kappa (2 lambda)^(alpha/2): the subordinator kappa^(2/alpha) S_t.
struct ScaledStable {
  double alpha;
  double kappa;
};

/// kill + mu lambda + c lambda^alpha, alpha in (0, 1): killed stable subordinator with drift.
struct StableWithDrift {
  double alpha;
  double mu;
  double c;
  double kill;
};

/// a lambda^(beta - alpha) + b lambda^beta, 0 < alpha < beta < 1.
struct SumOfStables {
  double a;
  double b;
  double alpha;
  double beta;
};

/// c lambda Gamma(lambda + nu) / Gamma(lambda + nu + mu), nu >= 0, mu in (0, 1).
struct BetaRatio {
  double c;
  double nu;
  double mu;
};

/// (lambda + m^(2/alpha))^(alpha/2) - m, alpha in (0, 2), m > 0.
struct Relativistic {
  double alpha;
  double m;
};

/// lambda^(alpha/2) log(1 + lambda)^(sign beta/2), sign = +1 or -1.
struct LogCorrected {
  double alpha;
  double beta;
  int sign;
};

/// A Laplace exponent eta, E[exp(-lambda S_t)] = exp(-t eta(lambda)).
class LaplaceExponent {
 public:
  using Family = std::variant<Stable, ScaledStable, StableWithDrift, SumOfStables, BetaRatio,
                              Relativistic, LogCorrected>;

  /// Throws DomainError if the parameters are outside the family's range.
  explicit LaplaceExponent(Family family);

  static LaplaceExponent stable(double alpha) { return LaplaceExponent(Stable{alpha}); }
  static LaplaceExponent scaled_stable(double alpha, double kappa) {
    return LaplaceExponent(ScaledStable{alpha, kappa});
  }

  double operator()(double lambda) const;

  const Family& family() const noexcept { return family_; }
  std::string name() const;
  std::string describe() const;

  /// eta(0+). Non-zero only for killed families.
  double kill_rate() const;

  /// Drift b in eta(lambda) = b lambda + int (1 - e^{-lambda y}) nu(dy).
  double drift() const;

  /// Density of the Levy measure at y > 0 when known in closed form.
  std::optional<double> levy_density(double y) const;

  /// True for Stable and ScaledStable, the families the samplers support.
  bool is_stable_type() const noexcept;
  /// alpha of a stable-type exponent; DomainError otherwise.
  double stable_alpha() const;
  /// kappa of a stable-type exponent (1 for Stable); DomainError otherwise.
  double stable_scale() const;

 private:
  Family family_;
};

double eval_eta(const LaplaceExponent& eta, double lambda);

/// Numerical audit of the Bernstein shape invariants on lambda in [1e-6, 1e6].
struct BernsteinAudit {
  double value_near_zero;  // eta(1e-12)
  double kill_rate;
  bool vanishes_at_zero;   // checked only when kill_rate == 0
  bool nondecreasing;
  bool concave;
};

BernsteinAudit audit_bernstein(const LaplaceExponent& eta);

/// Guard band around the critical decay exponent -1.
inline constexpr double kFitGuard = 0.01;

/// Verdict on the convergence of int_{lambda0}^inf d lambda / (eta(lambda) sqrt(lambda)).
struct IntegrabilityVerdict {
  bool converges = false;
  /// Fitted exponent within kFitGuard of -1; `converges` is then false.
  bool inconclusive = false;
  double fitted_exponent = 0.0;
  /// Quadrature of the integrand over [lambda0, 1e9].
  double grid_integral = 0.0;
  double lambda0 = 1.0;
};

/// Decides convergence by fitting the decay exponent of the integrand over the
/// top three decades of the geometric grid [lambda0, 1e9]. lambda0 in (0, 1e6).
IntegrabilityVerdict check_integrability_cd(const LaplaceExponent& eta, double lambda0 = 1.0);

/// Same as check_integrability_cd but throws InconclusiveError inside the guard band.
IntegrabilityVerdict require_integrability_cd(const LaplaceExponent& eta, double lambda0 = 1.0);

struct TableCase {
  std::string parameters;
  LaplaceExponent eta;
  bool expected;
  IntegrabilityVerdict verdict;

  bool agrees() const { return !verdict.inconclusive && verdict.converges == expected; }
};

struct TableRow {
  std::string exponent;
  std::string parameter_ranges;
  std::string condition;
  std::vector<TableCase> cases;
};

/// The six catalogued families with parameters 10% inside and 10% outside
/// each integrability boundary, checked against the stated condition.
std::vector<TableRow> integrability_table(double lambda0 = 1.0);

/// E[S_t^-p] for the alpha/2-stable subordinator, closed form.
double neg_moment_stable(double p, double alpha, double t);

/// E[S_t^-p] = Gamma(p)^-1 int_0^inf exp(-t eta(lambda)) lambda^(p-1) d lambda by
/// quadrature, split where t eta = 1 and integrated in log(lambda).
/// Throws DivergenceError when t eta(lambda) does not grow without bound.
double neg_moment_numeric(const LaplaceExponent& eta, double p, double t);

}  // namespace branchpde::bernstein
