#pragma once

// Internal quadrature helpers; not installed.

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>

#include <cmath>

namespace branchpde::detail {

/// Adaptive 61-point Gauss-Kronrod on a finite interval.
template <class F>
double integrate(F&& f, double a, double b, double rel_tol = 1e-12, unsigned max_depth = 25) {
  double error = 0.0;
  return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, a, b, max_depth, rel_tol,
                                                                       &error);
}

/// tanh-sinh on a finite interval; tolerates integrable endpoint singularities.
template <class F>
double integrate_singular(F&& f, double a, double b, double rel_tol = 1e-10) {
  static thread_local boost::math::quadrature::tanh_sinh<double> rule;
  return rule.integrate(f, a, b, rel_tol);
}

/// Least-squares slope of ys against xs.
template <class Range>
double fit_slope(const Range& xs, const Range& ys) {
  const auto n = static_cast<double>(std::size(xs));
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  auto iy = std::begin(ys);
  for (auto ix = std::begin(xs); ix != std::end(xs); ++ix, ++iy) {
    sx += *ix;
    sy += *iy;
    sxx += *ix * *ix;
    sxy += *ix * *iy;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

}  // namespace branchpde::detail
