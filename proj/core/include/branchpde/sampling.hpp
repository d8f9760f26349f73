#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "branchpde/rng.hpp"

namespace branchpde {

/// One step of subordinated Brownian motion: subordinator time ds and the
/// Gaussian displacement B_{ds}.
struct SubordinatedIncrement {
  double ds = 0.0;
  std::vector<double> dx;
};

/// S_t for the alpha/2-stable subordinator with Laplace exponent (2 lambda)^(alpha/2),
/// by the Chambers-Mallows-Stuck formula. alpha in (0, 2]; alpha = 2 returns 2t.
/// Draws one uniform and one exponential per attempt.
double sample_stable_subordinator(double alpha, double t, RngStream& rng);

/// Number of CMS draws rejected because they underflowed below 1e-300, summed
/// over all threads since program start.
std::uint64_t cms_underflow_resamples();

/// Increment of the subordinated process whose subordinator is kappa^(2/alpha) S_t,
/// the process generated by kappa Delta_alpha. dx gets d standard normals scaled by sqrt(ds).
SubordinatedIncrement sample_subordinated_increment(int d, double alpha, double kappa, double dt,
                                                    RngStream& rng);

/// Reusable sampler with the kappa scaling precomputed. Writes the displacement
/// into a caller-owned buffer so the tree engine does not allocate.
class IncrementSampler {
 public:
  IncrementSampler(double alpha, double kappa);

  /// Subordinator time over a clock interval dt > 0.
  double sample_ds(double dt, RngStream& rng) const;

  /// Fills dx and returns ds. Draw order: ds first, then dx[0], dx[1], ...
  double sample(double dt, std::span<double> dx, RngStream& rng) const;

  double alpha() const noexcept { return alpha_; }
  double kappa() const noexcept { return kappa_; }

 private:
  double alpha_;
  double kappa_;
  double scale_;
};

/// Gamma(shape delta, rate 1) by Marsaglia-Tsang; for delta < 1 the sample is
/// G(delta + 1) U^(1/delta). Never returns 0.
double sample_lifetime(double delta, RngStream& rng);

/// Index drawn from the cumulative table cdf (last entry 1) by inversion.
std::size_t sample_category(std::span<const double> cdf, RngStream& rng);

}  // namespace branchpde
