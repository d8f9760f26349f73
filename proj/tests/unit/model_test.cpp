#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "branchpde/errors.hpp"
#include "branchpde/model.hpp"
#include "branchpde/specfun.hpp"

using namespace branchpde;

namespace {

PdeModel make(const std::string& name, int d = 1, double alpha = 1.5, int k = 0, double kappa = 1.0) {
  BuiltinParams p;
  p.d = d;
  p.alpha = alpha;
  p.k = k;
  p.kappa = kappa;
  return builtin_model(name, p);
}

}  // namespace

TEST(Builtin, NldStructure) {
  const PdeModel m = make("nld", 10, 1.5, 0);
  EXPECT_EQ(m.d(), 10);
  EXPECT_EQ(m.m(), 0);
  ASSERT_EQ(m.f.size(), 3u);
  EXPECT_EQ(m.f.indices[0], MultiIndex{0});
  EXPECT_EQ(m.f.indices[1], MultiIndex{1});
  EXPECT_EQ(m.f.indices[2], MultiIndex{4});
  EXPECT_EQ(m.f.coeffs[1].constant(), 1.0);
  EXPECT_EQ(m.f.coeffs[2].constant(), 1.0);
  EXPECT_EQ(m.f.max_degree(), 4);
  EXPECT_NEAR(m.q.q(0), 1.0 / 3.0, 1e-15);
  // k = 0 < alpha/2: the source is unbounded near the unit sphere.
  EXPECT_TRUE(std::isinf(m.f.coeff_sup[0]));
  EXPECT_TRUE(m.eta.is_stable_type());
  EXPECT_EQ(m.eta.stable_alpha(), 1.5);
}

TEST(Builtin, NldSourceCoefficient) {
  const PdeModel m = make("nld", 2, 1.5, 1);
  const specfun::GetoorPair pair(1, 1.5, 2);
  for (double r : {0.0, 0.4, 0.9, 1.3}) {
    const std::vector<double> x = {r / std::sqrt(2.0), r / std::sqrt(2.0)};
    const double t = 0.7;
    const double expected = std::exp(-t) * pair.psi(r * r) -
                            std::exp(-4 * t) * std::pow(std::max(0.0, 1 - r * r), 4 * 1 + 2 * 1.5);
    EXPECT_NEAR(m.f.coeffs[0](t, x), expected, 1e-12);
  }
}

TEST(Builtin, NldManufacturedSolutionIdentity) {
  std::mt19937_64 gen(5);
  std::uniform_real_distribution<double> ut(0.0, 1.0), ux(-0.7, 0.7);
  for (int k : {0, 1}) {
    const PdeModel m = make("nld", 3, 1.5, k);
    const specfun::GetoorPair pair(k, 1.5, 3);
    for (int i = 0; i < 20; ++i) {
      const double t = ut(gen);
      const std::vector<double> x = {ux(gen), ux(gen), ux(gen)};
      const double r2 = x[0] * x[0] + x[1] * x[1] + x[2] * x[2];
      const double u = std::exp(-t) * pair.phi(r2);
      const double lhs = m.f.coeffs[0](t, x) + u + std::pow(u, 4);
      const double rhs = std::exp(-t) * pair.psi(r2) + std::exp(-t) * pair.phi(r2);
      EXPECT_NEAR(lhs, rhs, 1e-10);
      EXPECT_NEAR((*m.exact)(t, x), u, 1e-15);
    }
  }
}

TEST(Builtin, GraddStructure) {
  const PdeModel m = make("gradd", 2, 1.5, 1);
  EXPECT_EQ(m.m(), 2);
  ASSERT_EQ(m.f.size(), 4u);
  EXPECT_EQ(m.f.indices[0], (MultiIndex{0, 0, 0}));
  EXPECT_EQ(m.f.indices[1], (MultiIndex{1, 0, 0}));
  EXPECT_EQ(m.f.indices[2], (MultiIndex{1, 1, 0}));
  EXPECT_EQ(m.f.indices[3], (MultiIndex{1, 0, 1}));
  for (std::size_t i = 1; i < 4; ++i) EXPECT_EQ(m.f.coeffs[i].constant(), 1.0);
  EXPECT_NEAR(m.q.q_min(), 0.25, 1e-15);
  ASSERT_TRUE(m.phi.lipschitz.has_value());
  EXPECT_TRUE(std::isfinite(m.f.coeff_sup[0]));
}

TEST(Builtin, GraddManufacturedSolutionIdentity) {
  // -du/dt - Delta_alpha u = u + c_0 + u (du/dx1 + du/dx2) at u = e^-t Phi reduces
  // to e^-t Phi = e^-t Psi - e^-t Psi + e^-t Phi once c_0 is substituted.
  const int k = 2;
  const double alpha = 1.5, beta = k + alpha / 2;
  const PdeModel m = make("gradd", 2, alpha, k);
  const specfun::GetoorPair pair(k, alpha, 2);
  for (double t : {0.1, 0.9}) {
    for (auto x : {std::vector<double>{0.3, -0.2}, std::vector<double>{0.0, 0.6}, std::vector<double>{1.1, 0.0}}) {
      const double r2 = x[0] * x[0] + x[1] * x[1];
      const double u = std::exp(-t) * pair.phi(r2);
      const double grad_factor = r2 < 1 ? -2 * beta * std::exp(-t) * std::pow(1 - r2, beta - 1) : 0.0;
      const double u_grad_sum = u * grad_factor * (x[0] + x[1]);
      const double f = m.f.coeffs[0](t, x) + u + u_grad_sum;
      EXPECT_NEAR(f, std::exp(-t) * pair.psi(r2) + u, 1e-12);
    }
  }
}

TEST(Builtin, BurgersStructure) {
  const PdeModel m = make("burgers-cosine", 2, 1.5, 0, 10.0);
  ASSERT_EQ(m.f.size(), 2u);
  EXPECT_EQ(m.f.indices[0], (MultiIndex{1, 1, 0}));
  EXPECT_EQ(m.f.indices[1], (MultiIndex{1, 0, 1}));
  EXPECT_EQ(m.f.coeffs[0].constant(), -1.0);
  EXPECT_EQ(m.f.coeffs[1].constant(), -1.0);
  EXPECT_EQ(m.eta.stable_scale(), 10.0);
  EXPECT_EQ(m.phi.lipschitz, 1.0);
  EXPECT_EQ(m.phi.sup_norm, 1.0);
  const std::vector<double> x = {0.3, -0.4};
  EXPECT_NEAR(m.phi.phi(1.0, x), std::cos(0.3) * std::cos(0.4), 1e-15);

  const PdeModel h = make("burgers-halfspace", 2, 1.5, 0, 10.0);
  EXPECT_FALSE(h.phi.lipschitz.has_value());
  EXPECT_EQ(h.phi.phi(1.0, std::vector<double>{0.0, -5.0}), 1.0);
  EXPECT_EQ(h.phi.phi(1.0, std::vector<double>{-1e-9, 5.0}), 0.0);
}

TEST(Builtin, LinearTest) {
  BuiltinParams p;
  p.coefficient = 1.0;
  const PdeModel m = builtin_model("linear-test", p);
  ASSERT_EQ(m.f.size(), 1u);
  EXPECT_EQ(m.f.indices[0], MultiIndex{1});
  EXPECT_EQ(m.f.coeffs[0].constant(), 1.0);
  EXPECT_EQ(m.phi.phi.constant(), 1.0);
  EXPECT_NEAR((*m.exact)(0.5, std::vector<double>{0.0}), std::exp(0.5), 1e-15);
}

TEST(Builtin, Errors) {
  EXPECT_THROW(make("no-such-model"), ConfigError);
  EXPECT_THROW(make("gradd", 2, 1.0, 1), AdmissibilityError);
  EXPECT_THROW(make("burgers-cosine", 2, 0.8), AdmissibilityError);
  EXPECT_THROW(make("nld", 1, 2.0), AdmissibilityError);
  EXPECT_THROW(make("nld", 0), ConfigError);
  EXPECT_EQ(builtin_names().size(), 5u);
}

TEST(Builtin, AuditPassesForEveryModel) {
  for (const auto& name : builtin_names()) {
    const PdeModel m = make(name, 2, 1.5, 1, 10.0);
    const auto audit = audit_model(m, 1.0);
    EXPECT_TRUE(audit.ok()) << name << ": " << (audit.ok() ? "" : audit.warnings.front());
  }
}

TEST(Builtin, DefaultDeltaInsideBoundedWeightRange) {
  for (double alpha : {1.2, 1.5, 1.8}) {
    const PdeModel m = make("gradd", 2, alpha, 1);
    EXPECT_EQ(m.rho.delta(), default_delta(alpha));
    EXPECT_GT(m.rho.delta(), 0.0);
    EXPECT_LT(m.rho.delta(), 1.0 - 1.0 / alpha);
  }
  EXPECT_LT(default_delta(2.0), 0.5);
  EXPECT_EQ(default_delta(0.8), 0.5);
}

TEST(Audit, CatchesUnderstatedBounds) {
  PdeModel m = make("nld", 1, 1.5, 1);
  m.f.coeff_sup[0] = 0.01;
  m.phi.sup_norm = 0.1;
  m.phi.lipschitz = 0.5;
  EXPECT_EQ(audit_model(m, 1.0).warnings.size(), 3u);
}

TEST(BumpLipschitz, Values) {
  EXPECT_EQ(bump_lipschitz(1.0), 2.0);
  EXPECT_FALSE(bump_lipschitz(0.75).has_value());
  // beta = 1.75: brute-force maximum of |d/dr (1 - r^2)^beta|.
  double best = 0.0;
  for (double r = 0.0; r <= 1.0; r += 1e-6) best = std::max(best, 2 * 1.75 * r * std::pow(1 - r * r, 0.75));
  EXPECT_NEAR(*bump_lipschitz(1.75), best, 1e-9);
}

TEST(BranchingLaw, Validation) {
  EXPECT_THROW(BranchingLaw({0.5, 0.6}), ConfigError);
  EXPECT_THROW(BranchingLaw({1.0, 0.0}), ConfigError);
  EXPECT_THROW(BranchingLaw(std::vector<double>{}), ConfigError);
  const BranchingLaw q({0.2, 0.3, 0.5});
  EXPECT_EQ(q.q_min(), 0.2);
}

TEST(LifetimeDensity, DensityAndSurvival) {
  const LifetimeDensity rho(0.5);
  EXPECT_NEAR(rho.density(1.0), std::exp(-1.0) / std::sqrt(std::numbers::pi), 1e-15);
  EXPECT_EQ(rho.survival(0.0), 1.0);
  EXPECT_NEAR(rho.survival(0.5), specfun::upper_reg_gamma(0.5, 0.5), 1e-15);
  EXPECT_THROW(LifetimeDensity(0.0), ConfigError);
}

TEST(Nonlinearity, Validation) {
  PdeModel m = make("gradd", 2, 1.5, 1);
  m.f.indices[2] = {1, 1};
  EXPECT_THROW(m.f.validate(), ConfigError);
  PdeModel n = make("nld", 1, 1.5, 1);
  n.f.coeffs.pop_back();
  EXPECT_THROW(n.validate(), ConfigError);
}
