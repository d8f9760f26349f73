#include "branchpde/engine.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <fmt/format.h>
#include <limits>
#include <thread>

#include "branchpde/errors.hpp"
#include "branchpde/sampling.hpp"

namespace branchpde {

void TreeBudget::validate() const {
  if (max_particles == 0 || max_generation == 0) throw ConfigError("tree budget: limits must be positive");
}

void RunningStats::merge(const RunningStats& other) {
  if (other.n_ == 0) return;
  if (n_ == 0) {
    *this = other;
    return;
  }
  const double n = static_cast<double>(n_ + other.n_);
  const double delta = other.mean_ - mean_;
  mean_ += delta * static_cast<double>(other.n_) / n;
  m2_ += other.m2_ + delta * delta * static_cast<double>(n_) * static_cast<double>(other.n_) / n;
  n_ += other.n_;
}

double RunningStats::standard_error() const {
  return n_ > 1 ? std::sqrt(variance() / static_cast<double>(n_)) : 0.0;
}

bool same_statistics(const EstimatorResult& a, const EstimatorResult& b) {
  EstimatorResult a2 = a;
  a2.elapsed_seconds = b.elapsed_seconds;
  return a2 == b;
}

// ---------------------------------------------------------------------------
// Tree growth

namespace {

struct Particle {
  double birth;
  std::size_t position;  // offset into the flat position store
  int mark;
  int generation;  // length of the label
};

}  // namespace

struct TreeGrower::Impl {
  Impl(const PdeModel& m, double horizon)
      : model(m),
        T(horizon),
        d(static_cast<std::size_t>(m.d())),
        sampler(m.eta.stable_alpha(), m.eta.stable_scale()),
        dx(d),
        point(d),
        origin(d) {
    inverse_q.reserve(m.q.size());
    for (std::size_t i = 0; i < m.q.size(); ++i) inverse_q.push_back(1.0 / m.q.q(i));
  }

  const PdeModel& model;
  double T;
  std::size_t d;
  IncrementSampler sampler;
  std::vector<double> inverse_q;
  std::vector<Particle> queue;
  std::vector<double> positions;
  std::vector<double> dx;
  std::vector<double> point;
  std::vector<double> origin;
};

TreeGrower::TreeGrower(const PdeModel& model, double T) {
  if (!model.eta.is_stable_type()) {
    throw DomainError("tree sampling supports stable-type exponents only, got " + model.eta.describe());
  }
  if (!std::isfinite(T)) throw DomainError("horizon T must be finite");
  impl_ = std::make_unique<Impl>(model, T);
}

TreeGrower::~TreeGrower() = default;
TreeGrower::TreeGrower(TreeGrower&&) noexcept = default;
TreeGrower& TreeGrower::operator=(TreeGrower&&) noexcept = default;

TreeOutcome TreeGrower::grow(double t, std::span<const double> x, int mark, RngStream& rng,
                             const TreeBudget& budget) {
  Impl& s = *impl_;
  const PdeModel& model = s.model;
  const double T = s.T;
  if (!(t <= T) || !std::isfinite(t)) throw DomainError(fmt::format("tree start t = {} must satisfy t <= T = {}", t, T));
  if (x.size() != s.d) throw DimensionError(fmt::format("point has {} coordinates, model has d = {}", x.size(), s.d));
  if (mark < 0 || mark > model.d()) throw DomainError(fmt::format("mark {} outside 0..{}", mark, model.d()));
  if (mark != 0 && t == T) {
    throw DegenerateDerivativeError("derivative marks need t < T: the weight is 0/0 at t = T");
  }

  s.queue.clear();
  s.positions.assign(x.begin(), x.end());
  s.queue.push_back({t, 0, mark, 1});

  TreeOutcome out;
  double h = 1.0;
  for (std::size_t head = 0; head < s.queue.size(); ++head) {
    const Particle p = s.queue[head];
    std::copy_n(s.positions.begin() + static_cast<std::ptrdiff_t>(p.position), s.d, s.origin.begin());
    out.max_gen = std::max(out.max_gen, static_cast<std::size_t>(p.generation));

    const double tau = model.rho.sample(rng);
    if (p.birth + tau >= T) {
      // Leaf: the branch runs to the horizon.
      const double gap = T - p.birth;
      double ds = 0.0;
      if (gap > 0.0) {
        ds = s.sampler.sample(gap, s.dx, rng);
      } else {
        std::fill(s.dx.begin(), s.dx.end(), 0.0);
      }
      for (std::size_t j = 0; j < s.d; ++j) s.point[j] = s.origin[j] + s.dx[j];
      double value = model.phi.phi(T, s.point);
      double weight = 1.0;
      if (p.mark != 0) {
        value -= model.phi.phi(T, s.origin);
        weight = s.dx[static_cast<std::size_t>(p.mark - 1)] / ds;
      }
      h *= value * weight / model.rho.survival(gap);
      ++out.leaves;
      continue;
    }

    // Branching particle.
    const double death = p.birth + tau;
    const double ds = s.sampler.sample(tau, s.dx, rng);
    const std::size_t at = s.positions.size();
    for (std::size_t j = 0; j < s.d; ++j) s.positions.push_back(s.origin[j] + s.dx[j]);
    const std::size_t which = model.q.sample(rng);
    const MultiIndex& l = model.f.indices[which];

    const double weight = p.mark != 0 ? s.dx[static_cast<std::size_t>(p.mark - 1)] / ds : 1.0;
    const double c = model.f.coeffs[which](death, std::span<const double>(s.positions.data() + at, s.d));
    h *= c * weight * s.inverse_q[which] / model.rho.density(tau);

    const int child_generation = p.generation + 1;
    const int n_children = degree(l);
    if (n_children > 0 && static_cast<std::size_t>(child_generation) > budget.max_generation) {
      throw BudgetExceededError(
          fmt::format("tree exceeded the generation budget of {}; shrink T - t", budget.max_generation), 0);
    }
    if (s.queue.size() + static_cast<std::size_t>(n_children) > budget.max_particles) {
      throw BudgetExceededError(
          fmt::format("tree exceeded the particle budget of {}; shrink T - t", budget.max_particles), 0);
    }
    for (std::size_t j = 0; j < l.size(); ++j) {
      for (int c_i = 0; c_i < l[j]; ++c_i) s.queue.push_back({death, at, static_cast<int>(j), child_generation});
    }
  }
  if (!std::isfinite(h)) {
    throw EvaluationError(fmt::format("tree functional is not finite ({}) at t = {}", h, t));
  }
  out.h_value = h;
  out.particles_total = s.queue.size();
  return out;
}

TreeOutcome grow_tree(const PdeModel& model, double t, std::span<const double> x, int mark, double T,
                      RngStream& rng, const TreeBudget& budget) {
  TreeGrower grower(model, T);
  return grower.grow(t, x, mark, rng, budget);
}

// ---------------------------------------------------------------------------
// Estimation

namespace {

constexpr std::size_t kChunk = 1024;
constexpr std::size_t kNoFailure = std::numeric_limits<std::size_t>::max();

struct ChunkResult {
  RunningStats h;
  RunningStats size;
  std::size_t max_particles = 0;
  std::size_t max_generation = 0;
  std::size_t failed_tree = kNoFailure;
  std::exception_ptr error;
};

void atomic_min(std::atomic<std::size_t>& target, std::size_t value) {
  std::size_t current = target.load();
  while (value < current && !target.compare_exchange_weak(current, value)) {
  }
}

}  // namespace

EstimatorResult estimate(const PdeModel& model, double t, std::span<const double> x, int mark, double T,
                         const EstimatorOptions& options) {
  if (options.n_trees < 2) throw ConfigError("estimate: n_trees must be at least 2");
  if (options.workers == 0) throw ConfigError("estimate: workers must be positive");
  options.budget.validate();
  if (mark != 0 && t == T) {
    throw DegenerateDerivativeError("derivative marks need t < T: the weight is 0/0 at t = T");
  }
  if (x.size() != static_cast<std::size_t>(model.d())) {
    throw DimensionError(fmt::format("point has {} coordinates, model has d = {}", x.size(), model.d()));
  }
  if (!(t <= T)) throw DomainError(fmt::format("tree start t = {} must satisfy t <= T = {}", t, T));
  if (mark < 0 || mark > model.d()) throw DomainError(fmt::format("mark {} outside 0..{}", mark, model.d()));
  TreeGrower probe(model, T);

  const auto started = std::chrono::steady_clock::now();
  const std::size_t n = options.n_trees;
  const std::size_t chunks = (n + kChunk - 1) / kChunk;
  std::vector<ChunkResult> results(chunks);
  std::atomic<std::size_t> next_chunk{0};
  std::atomic<std::size_t> first_failure{kNoFailure};

  const auto work = [&](TreeGrower& grower) {
    for (;;) {
      const std::size_t c = next_chunk.fetch_add(1);
      if (c >= chunks) return;
      const std::size_t begin = c * kChunk;
      const std::size_t end = std::min(n, begin + kChunk);
      ChunkResult& r = results[c];
      for (std::size_t j = begin; j < end; ++j) {
        if (j > first_failure.load(std::memory_order_relaxed)) break;
        RngStream rng(options.seed, j);
        try {
          const TreeOutcome o = grower.grow(t, x, mark, rng, options.budget);
          r.h.push(o.h_value);
          r.size.push(static_cast<double>(o.particles_total));
          r.max_particles = std::max(r.max_particles, o.particles_total);
          r.max_generation = std::max(r.max_generation, o.max_gen);
        } catch (...) {
          r.failed_tree = j;
          r.error = std::current_exception();
          atomic_min(first_failure, j);
          break;
        }
      }
    }
  };

  const unsigned workers = static_cast<unsigned>(std::min<std::size_t>(options.workers, chunks));
  if (workers <= 1) {
    work(probe);
  } else {
    std::vector<std::thread> threads;
    std::vector<std::exception_ptr> setup_errors(workers);
    for (unsigned w = 0; w < workers; ++w) {
      threads.emplace_back([&, w] {
        try {
          TreeGrower grower(model, T);
          work(grower);
        } catch (...) {
          setup_errors[w] = std::current_exception();
        }
      });
    }
    for (auto& th : threads) th.join();
    for (auto& e : setup_errors) {
      if (e) std::rethrow_exception(e);
    }
  }

  const std::size_t failed = first_failure.load();
  if (failed != kNoFailure) {
    const auto& r = results[failed / kChunk];
    try {
      std::rethrow_exception(r.error);
    } catch (const BudgetExceededError& e) {
      throw BudgetExceededError(fmt::format("tree {} of {}: {}", failed, n, e.what()), failed);
    }
  }

  RunningStats h, size;
  EstimatorResult result;
  for (const auto& r : results) {
    h.merge(r.h);
    size.merge(r.size);
    result.max_particles = std::max(result.max_particles, r.max_particles);
    result.max_generation = std::max(result.max_generation, r.max_generation);
  }
  result.mean = h.mean();
  result.std_error = h.standard_error();
  result.ci_lo = result.mean - kZ95 * result.std_error;
  result.ci_hi = result.mean + kZ95 * result.std_error;
  result.n_trees = h.count();
  result.truncated_trees = 0;
  result.mean_particles = size.mean();
  result.particles_stderr = size.standard_error();
  result.elapsed_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  return result;
}

std::uint64_t gradient_seed(std::uint64_t seed, int mark) {
  return mix_seed(seed + static_cast<std::uint64_t>(mark));
}

std::vector<EstimatorResult> estimate_gradient_all(const PdeModel& model, double t, std::span<const double> x,
                                                   double T, const EstimatorOptions& options) {
  if (!(t < T)) throw DegenerateDerivativeError("derivative marks need t < T");
  std::vector<EstimatorResult> out;
  for (int i = 1; i <= model.m(); ++i) {
    EstimatorOptions per_mark = options;
    per_mark.seed = gradient_seed(options.seed, i);
    out.push_back(estimate(model, t, x, i, T, per_mark));
  }
  return out;
}

}  // namespace branchpde
