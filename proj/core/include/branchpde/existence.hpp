#pragma once

#include <optional>
#include <string>
#include <vector>

#include "branchpde/bernstein.hpp"
#include "branchpde/model.hpp"

namespace branchpde::existence {

/// Standard: E|N(0,1)|^p = 2^(p/2) Gamma((p+1)/2) / sqrt(pi).
/// PaperLiteral: the alternative constant 2^p Gamma(p + 1/2) / sqrt(pi).
enum class MomentConvention { Standard, PaperLiteral };

double abs_gaussian_moment(double p, MomentConvention convention = MomentConvention::Standard);

/// Moment conditions for finiteness of E|H|^p with a gamma(delta) lifetime.
struct Theorem2Check {
  double p = 1.0;
  double T = 1.0;
  double delta = 0.5;
  double lambda0 = 1.0;

  /// int_0^T rho^(1-p)(s) ds < inf.
  bool cond_rho = false;
  double rho_integral = 0.0;

  /// int_0^T int_0^inf e^(-s eta(lambda)) lambda^(p/2-1) / rho^(p-1)(s) d lambda ds < inf,
  /// decided from the fitted power of the inner integral as s -> 0.
  bool cond_eta = false;
  bool eta_inconclusive = false;
  double eta_exponent = 0.0;
  double eta_integral = 0.0;

  /// int_lambda0^inf d lambda / (eta sqrt(lambda)) < inf.
  bool cd_check = false;
  bool cd_inconclusive = false;
  double cd_integral = 0.0;

  /// cond_rho and cond_eta, plus cd_check when p = 1.
  bool passes() const { return cond_rho && cond_eta && (p != 1.0 || cd_check); }
};

/// Throws DomainError for p < 1 or T <= 0.
Theorem2Check check_theorem2(const bernstein::LaplaceExponent& eta, double delta, double p, double T,
                             double lambda0 = 1.0);

/// sup over s in (0, T] of s^a e^(b s): +inf for a < 0, otherwise from the
/// stationary point -a/b when it lies inside, else the endpoint value.
double sup_power_exp(double a, double b, double T);

struct HorizonA {
  double C_circ = 0.0;
  double C_partial = 0.0;
  double C_partial_ratio = 0.0;
  bool certified = false;
};

/// Route (a). The exponent must be stable-type with alpha in (1, 2].
///
/// Throws AdmissibilityError when delta >= 1 - 1/alpha (the sup in C_circ is
/// infinite) or the exponent is not stable-type; NotLipschitzError when phi
/// has no Lipschitz constant.
HorizonA horizon_bound_a(const PdeModel& model, const bernstein::LaplaceExponent& eta, double delta, double p,
                         double T, MomentConvention convention = MomentConvention::Standard);
HorizonA horizon_bound_a(const PdeModel& model, double p, double T,
                         MomentConvention convention = MomentConvention::Standard);

struct HorizonB {
  double C_tilde = 0.0;
  /// Right-hand side of T < (1/C_tilde) int_{x0}^inf dx / sum_l |c_l| x^|l|;
  /// +inf when every |l| <= 1.
  double bound = 0.0;
  bool certified = false;
};

/// Route (b). Certified when the bound is infinite or C_tilde is finite and T < bound.
HorizonB horizon_bound_b(const PdeModel& model, const bernstein::LaplaceExponent& eta, double delta, double p,
                         double T, MomentConvention convention = MomentConvention::Standard);
HorizonB horizon_bound_b(const PdeModel& model, double p, double T,
                         MomentConvention convention = MomentConvention::Standard);

/// Largest T in (0, T_hi] certified by route (a), by bisection to tol; 0 if none.
double max_certified_horizon_a(const PdeModel& model, double p, double T_hi, double tol = 1e-10,
                               MomentConvention convention = MomentConvention::Standard);

enum class Verdict { CertifiedA, CertifiedB, Uncertified };

std::string to_string(Verdict v);
Verdict verdict_from_string(const std::string& s);

struct HorizonReport {
  std::string model;
  double p = 2.0;
  int m0 = 0;
  double T = 1.0;
  double delta = 0.5;
  double lambda0 = 1.0;
  MomentConvention convention = MomentConvention::Standard;
  double M_p = 1.0;

  bool cond_rho = false;
  double cond_rho_value = 0.0;
  bool cond_eta = false;
  bool cond_eta_inconclusive = false;
  double cond_eta_value = 0.0;
  bool cd_check = false;
  bool cd_inconclusive = false;
  double cd_value = 0.0;

  double C_circ = 0.0;
  double C_partial = 0.0;
  double C_partial_ratio = 0.0;
  double C_tilde = 0.0;
  double t3b_bound = 0.0;

  Verdict verdict = Verdict::Uncertified;
  std::vector<std::string> notices;

  bool certified() const noexcept { return verdict != Verdict::Uncertified; }
  friend bool operator==(const HorizonReport&, const HorizonReport&) = default;
};

struct ReportOptions {
  double p = 2.0;
  /// Defaults to the model's m.
  std::optional<int> m0;
  double lambda0 = 1.0;
  MomentConvention convention = MomentConvention::Standard;
};

/// Evaluates every check for the model at horizon T. Inadmissible shape
/// parameters and non-Lipschitz data become notices with an uncertified
/// verdict rather than exceptions. Throws ConfigError for m0 outside [m, d].
HorizonReport build_report(const PdeModel& model, double T, const ReportOptions& options = {});

/// Multi-line human summary.
std::string summarize(const HorizonReport& report);

}  // namespace branchpde::existence
