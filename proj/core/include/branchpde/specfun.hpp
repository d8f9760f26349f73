#pragma once

#include <span>

namespace branchpde::specfun {

/// Truncation control for series evaluations.
struct EvalPolicy {
  double rel_tol = 1e-12;
  int max_terms = 10'000;

  /// Throws DomainError unless rel_tol in (0, 1e-3] and max_terms >= 100.
  void validate() const;
};

/// Gamma function for p > 0.
double gamma_fn(double p);

/// Gamma function on the whole real line minus the poles, via reflection for
/// negative arguments. Gamma(-alpha/2) < 0 for alpha in (0, 2).
double gamma_signed(double x);

/// 1 / Gamma(x), zero at the poles x = 0, -1, -2, ...
double reciprocal_gamma(double x);

/// Regularized upper incomplete gamma Q(delta, z) = Gamma(delta, z) / Gamma(delta).
/// Series for z < delta + 1, Lentz continued fraction otherwise.
double upper_reg_gamma(double delta, double z, const EvalPolicy& policy = {});

/// Regularized lower incomplete gamma P(delta, z) = 1 - Q(delta, z).
double lower_reg_gamma(double delta, double z, const EvalPolicy& policy = {});

/// Gauss hypergeometric function 2F1(a, b; c; z) for real z in [-1, 1], or any
/// z when a or b is a non-positive integer (terminating polynomial).
///
/// Direct series on [-0.5, 0.9], Pfaff transformation on [-1, -0.5), the
/// 1 - z connection formula on (0.9, 1) and Gauss summation at z = 1.
/// Throws AccuracyError if a series does not converge within max_terms.
double hyp2f1(double a, double b, double c, double z, const EvalPolicy& policy = {});

/// Bump function (1 - |x|^2)_+^(k + alpha/2).
double phi_bump(int k, double alpha, std::span<const double> x);

/// Fractional Laplacian image of phi_bump: Delta_alpha Phi_{k,alpha} = -Psi_{k,alpha}
/// on R^d with d = x.size(). Interior and exterior closed forms in terms of 2F1.
double psi_getoor(int k, double alpha, std::span<const double> x, const EvalPolicy& policy = {});

/// The pair (Phi_{k,alpha}, Psi_{k,alpha}) in fixed dimension with the Gamma
/// prefactors precomputed; evaluates from the squared radius.
class GetoorPair {
 public:
  GetoorPair(int k, double alpha, int d, EvalPolicy policy = {});

  double phi(double r2) const;
  double psi(double r2) const;

  int k() const noexcept { return k_; }
  double alpha() const noexcept { return alpha_; }
  int dimension() const noexcept { return d_; }

  /// True when Psi blows up as |x| -> 1+ (k < alpha/2).
  bool exterior_singular() const noexcept { return k_ < alpha_ / 2.0; }

 private:
  int k_;
  double alpha_;
  int d_;
  EvalPolicy policy_;
  double exponent_;
  double interior_prefactor_;
  double exterior_prefactor_;
};

}  // namespace branchpde::specfun
