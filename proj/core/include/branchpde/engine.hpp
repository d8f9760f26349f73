#pragma once

#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <vector>

#include "branchpde/model.hpp"
#include "branchpde/rng.hpp"

namespace branchpde {

struct TreeBudget {
  std::size_t max_particles = 1'000'000;
  std::size_t max_generation = 10'000;

  void validate() const;
};

struct TreeOutcome {
  double h_value = 0.0;
  std::size_t particles_total = 0;
  std::size_t leaves = 0;
  std::size_t max_gen = 0;
};

/// Welford accumulator with an exact pairwise merge.
class RunningStats {
 public:
  void push(double x) {
    ++n_;
    const double delta = x - mean_;
    mean_ += delta / static_cast<double>(n_);
    m2_ += delta * (x - mean_);
  }
  void merge(const RunningStats& other);

  std::size_t count() const noexcept { return n_; }
  double mean() const noexcept { return mean_; }
  /// Sample variance (n - 1 denominator); 0 for n < 2.
  double variance() const noexcept { return n_ > 1 ? m2_ / static_cast<double>(n_ - 1) : 0.0; }
  double standard_error() const;

 private:
  std::size_t n_ = 0;
  double mean_ = 0.0;
  double m2_ = 0.0;
};

struct EstimatorResult {
  double mean = 0.0;
  double std_error = 0.0;
  double ci_lo = 0.0;
  double ci_hi = 0.0;
  std::size_t n_trees = 0;
  /// Always 0: a tree over budget aborts the estimate instead of being dropped.
  std::size_t truncated_trees = 0;
  double elapsed_seconds = 0.0;

  // Tree-size statistics.
  double mean_particles = 0.0;
  double particles_stderr = 0.0;
  std::size_t max_particles = 0;
  std::size_t max_generation = 0;

  friend bool operator==(const EstimatorResult&, const EstimatorResult&) = default;
};

/// Everything but the wall-clock time.
bool same_statistics(const EstimatorResult& a, const EstimatorResult& b);

inline constexpr double kZ95 = 1.959964;

struct EstimatorOptions {
  std::size_t n_trees = 10'000;
  std::uint64_t seed = 1;
  unsigned workers = 1;
  TreeBudget budget;
};

/// Grows marked branching trees for one model and horizon, reusing its
/// buffers between trees. One instance per thread.
class TreeGrower {
 public:
  /// Throws DomainError if the model's exponent is not stable-type.
  TreeGrower(const PdeModel& model, double T);
  ~TreeGrower();
  TreeGrower(TreeGrower&&) noexcept;
  TreeGrower& operator=(TreeGrower&&) noexcept;

  /// One realization of H_phi for the tree rooted at (t, x) with the given mark.
  TreeOutcome grow(double t, std::span<const double> x, int mark, RngStream& rng,
                   const TreeBudget& budget = {});

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

TreeOutcome grow_tree(const PdeModel& model, double t, std::span<const double> x, int mark, double T,
                      RngStream& rng, const TreeBudget& budget = {});

/// Monte Carlo mean of H_phi over trees j = 0..n-1, tree j drawn from stream
/// (seed, j). Trees are processed in chunks of 1024 whose statistics are
/// merged in index order, so the result does not depend on `workers`.
///
/// Throws BudgetExceededError carrying the index of the first tree over
/// budget, DegenerateDerivativeError for mark != 0 at t = T.
EstimatorResult estimate(const PdeModel& model, double t, std::span<const double> x, int mark, double T,
                         const EstimatorOptions& options);

/// Estimates of du/dx_i for i = 1..m, each mark with its own master seed.
std::vector<EstimatorResult> estimate_gradient_all(const PdeModel& model, double t, std::span<const double> x,
                                                   double T, const EstimatorOptions& options);

/// Master seed used for mark i by estimate_gradient_all.
std::uint64_t gradient_seed(std::uint64_t seed, int mark);

}  // namespace branchpde
