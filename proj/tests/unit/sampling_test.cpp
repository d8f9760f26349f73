#include <gtest/gtest.h>

#include <cmath>
#include <set>
#include <thread>
#include <vector>

#include "branchpde/errors.hpp"
#include "branchpde/model.hpp"
#include "branchpde/rng.hpp"
#include "branchpde/sampling.hpp"
#include "branchpde/specfun.hpp"
#include "oracles.hpp"

using namespace branchpde;

// Known-answer vectors published with Random123.
TEST(Philox, KnownAnswers) {
  using A4 = std::array<std::uint32_t, 4>;
  EXPECT_EQ(philox4x32_10({0, 0, 0, 0}, {0, 0}), (A4{0x6627e8d5, 0xe169c58d, 0xbc57ac4c, 0x9b00dbd8}));
  EXPECT_EQ(philox4x32_10({0xffffffff, 0xffffffff, 0xffffffff, 0xffffffff}, {0xffffffff, 0xffffffff}),
            (A4{0x408f276d, 0x41c83b0e, 0xa20bc7c6, 0x6d5451fd}));
  EXPECT_EQ(philox4x32_10({0x243f6a88, 0x85a308d3, 0x13198a2e, 0x03707344}, {0xa4093822, 0x299f31d0}),
            (A4{0xd16cfe09, 0x94fdcceb, 0x5001e420, 0x24126ea1}));
}

TEST(RngStream, SameKeySameSequence) {
  RngStream a(42, 7), b(42, 7);
  for (int i = 0; i < 1000; ++i) ASSERT_EQ(a(), b());
  EXPECT_EQ(a, b);
}

TEST(RngStream, IdenticalAcrossThreads) {
  std::vector<std::uint64_t> here, there;
  RngStream a(9, 3);
  for (int i = 0; i < 100; ++i) here.push_back(a());
  std::thread worker([&] {
    RngStream b(9, 3);
    for (int i = 0; i < 100; ++i) there.push_back(b());
  });
  worker.join();
  EXPECT_EQ(here, there);
}

TEST(RngStream, CopyForksTheSequence) {
  RngStream a(1, 1);
  a();
  RngStream b = a;
  EXPECT_EQ(a(), b());
}

TEST(RngStream, DistinctStreamsUncorrelated) {
  RngStream a(5, 0), b(5, 1);
  std::vector<double> x, y;
  for (int i = 0; i < 100'000; ++i) {
    x.push_back(a.uniform());
    y.push_back(b.uniform());
  }
  const auto mx = oracle::moments(x), my = oracle::moments(y);
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx.mean) * (y[i] - my.mean);
    sxx += (x[i] - mx.mean) * (x[i] - mx.mean);
    syy += (y[i] - my.mean) * (y[i] - my.mean);
  }
  EXPECT_LT(std::abs(sxy / std::sqrt(sxx * syy)), 0.01);
}

TEST(RngStream, UniformOpenIntervalAndMoments) {
  RngStream rng(3, 0);
  std::vector<double> u, n;
  for (int i = 0; i < 200'000; ++i) {
    const double v = rng.uniform();
    ASSERT_GT(v, 0.0);
    ASSERT_LT(v, 1.0);
    u.push_back(v);
    n.push_back(rng.normal());
  }
  EXPECT_NEAR(oracle::moments(u).mean, 0.5, 4 * std::sqrt(1.0 / 12 / 2e5));
  EXPECT_NEAR(oracle::moments(n).mean, 0.0, 4 * std::sqrt(1.0 / 2e5));
  std::vector<double> sq;
  for (double v : n) sq.push_back(v * v);
  EXPECT_NEAR(oracle::moments(sq).mean, 1.0, 4 * std::sqrt(2.0 / 2e5));
}

TEST(MixSeed, Distinct) {
  std::set<std::uint64_t> seen;
  for (std::uint64_t i = 0; i < 1000; ++i) seen.insert(mix_seed(i));
  EXPECT_EQ(seen.size(), 1000u);
}

TEST(Cms, AlphaTwoIsDeterministic) {
  RngStream rng(1, 0);
  for (double t : {0.1, 0.5, 3.0}) EXPECT_EQ(sample_stable_subordinator(2.0, t, rng), 2.0 * t);
}

TEST(Cms, RejectsBadArguments) {
  RngStream rng(1, 0);
  EXPECT_THROW(sample_stable_subordinator(0.0, 1.0, rng), DomainError);
  EXPECT_THROW(sample_stable_subordinator(2.1, 1.0, rng), DomainError);
  EXPECT_THROW(sample_stable_subordinator(1.5, 0.0, rng), DomainError);
}

TEST(Cms, StrictlyPositive) {
  RngStream rng(2, 0);
  for (int i = 0; i < 1'000'000; ++i) ASSERT_GT(sample_stable_subordinator(1.5, 1.0, rng), 0.0);
}

TEST(Cms, LaplaceTransformGrid) {
  for (double alpha : {1.2, 1.5, 1.8}) {
    for (double t : {0.5, 1.0}) {
      RngStream rng(17, static_cast<std::uint64_t>(alpha * 10 + t * 100));
      std::vector<double> s(1'000'000);
      for (auto& v : s) v = sample_stable_subordinator(alpha, t, rng);
      for (double lambda : {0.5, 1.0, 2.0}) {
        std::vector<double> e;
        e.reserve(s.size());
        for (double v : s) e.push_back(std::exp(-lambda * v));
        const auto m = oracle::moments(e);
        const double exact = std::exp(-t * std::pow(2.0 * lambda, alpha / 2.0));
        EXPECT_LT(std::abs(m.mean - exact), 4 * m.std_error) << alpha << " " << t << " " << lambda;
      }
    }
  }
}

TEST(Cms, SelfSimilarity) {
  RngStream a(4, 0), b(4, 1);
  const double alpha = 1.5, t = 0.3;
  std::vector<double> direct(100'000), scaled(100'000);
  for (auto& v : direct) v = sample_stable_subordinator(alpha, t, a);
  for (auto& v : scaled) v = std::pow(t, 2.0 / alpha) * sample_stable_subordinator(alpha, 1.0, b);
  EXPECT_LT(oracle::ks_statistic(direct, scaled), 0.01);
}

TEST(Increment, DeterministicForAlphaTwo) {
  RngStream rng(1, 0);
  for (int i = 0; i < 10; ++i) EXPECT_EQ(sample_subordinated_increment(1, 2.0, 1.0, 0.5, rng).ds, 1.0);
  EXPECT_EQ(sample_subordinated_increment(1, 2.0, 3.0, 0.5, rng).ds, 3.0);
}

TEST(Increment, ConditionalVarianceAndSymmetry) {
  RngStream rng(6, 0);
  std::vector<std::vector<double>> ratio(3), coord(3);
  for (int i = 0; i < 100'000; ++i) {
    const auto inc = sample_subordinated_increment(3, 1.5, 1.0, 1.0, rng);
    ASSERT_GT(inc.ds, 0.0);
    for (int j = 0; j < 3; ++j) {
      ratio[j].push_back(inc.dx[j] * inc.dx[j] / inc.ds);
      coord[j].push_back(inc.dx[j]);
    }
  }
  for (int j = 0; j < 3; ++j) {
    EXPECT_NEAR(oracle::moments(ratio[j]).mean, 1.0, 0.02);
    const auto m = oracle::moments(coord[j]);
    EXPECT_LT(std::abs(m.mean), 4 * m.std_error);
  }
}

TEST(Increment, KappaScaling) {
  RngStream a(8, 0), b(8, 1);
  std::vector<double> scaled(100'000), reference(100'000);
  for (auto& v : scaled) v = sample_subordinated_increment(1, 1.5, 4.0, 1.0, a).ds;
  for (auto& v : reference) v = std::pow(4.0, 4.0 / 3.0) * sample_subordinated_increment(1, 1.5, 1.0, 1.0, b).ds;
  EXPECT_LT(oracle::ks_statistic(scaled, reference), 0.01);
}

TEST(Increment, SamplerMatchesFreeFunction) {
  const IncrementSampler sampler(1.5, 2.0);
  RngStream a(10, 0), b(10, 0);
  std::vector<double> dx(2);
  for (int i = 0; i < 100; ++i) {
    const double ds = sampler.sample(0.7, dx, a);
    const auto inc = sample_subordinated_increment(2, 1.5, 2.0, 0.7, b);
    EXPECT_EQ(ds, inc.ds);
    EXPECT_EQ(dx, inc.dx);
  }
}

TEST(ZeroMeanWeight, DerivativeWeightHasMeanZero) {
  RngStream rng(12, 0);
  std::vector<double> w(1'000'000);
  for (auto& v : w) {
    const auto inc = sample_subordinated_increment(1, 1.5, 1.0, 0.25, rng);
    v = inc.dx[0] / inc.ds;
  }
  const auto m = oracle::moments(w);
  EXPECT_LT(std::abs(m.mean), 4 * m.std_error);
}

TEST(Lifetime, Means) {
  for (auto [delta, tol] : {std::pair{1.0, 0.004}, {0.5, 0.003}}) {
    RngStream rng(13, 0);
    std::vector<double> s(1'000'000);
    for (auto& v : s) v = sample_lifetime(delta, rng);
    EXPECT_NEAR(oracle::moments(s).mean, delta, tol);
  }
}

TEST(Lifetime, SurvivalMatchesIncompleteGamma) {
  RngStream rng(14, 0);
  std::vector<double> above(1'000'000);
  for (auto& v : above) v = sample_lifetime(0.5, rng) > 1.0 ? 1.0 : 0.0;
  const auto m = oracle::moments(above);
  EXPECT_LT(std::abs(m.mean - specfun::upper_reg_gamma(0.5, 1.0)), 3 * m.std_error);
}

TEST(Lifetime, SmallShapeStaysPositive) {
  RngStream rng(15, 0);
  for (int i = 0; i < 100'000; ++i) ASSERT_GT(sample_lifetime(0.05, rng), 0.0);
}

TEST(Category, SingletonDrawsNothing) {
  RngStream rng(16, 0);
  const RngStream before = rng;
  const std::vector<double> cdf = {1.0};
  for (int i = 0; i < 10; ++i) EXPECT_EQ(sample_category(cdf, rng), 0u);
  EXPECT_EQ(rng, before);
}

TEST(Offspring, NldFrequencies) {
  BuiltinParams p;
  const PdeModel model = builtin_model("nld", p);
  ASSERT_EQ(model.f.size(), 3u);
  RngStream rng(18, 0);
  std::vector<std::vector<double>> hits(3);
  for (int i = 0; i < 1'000'000; ++i) {
    const MultiIndex& l = sample_offspring(model, rng);
    bool member = false;
    for (std::size_t j = 0; j < 3; ++j) {
      const bool match = model.f.indices[j] == l;
      hits[j].push_back(match ? 1.0 : 0.0);
      member = member || match;
    }
    ASSERT_TRUE(member);
  }
  for (const auto& h : hits) {
    const auto m = oracle::moments(h);
    EXPECT_LT(std::abs(m.mean - 1.0 / 3.0), 3 * m.std_error);
  }
}
