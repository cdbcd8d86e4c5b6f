#include <cmath>
#include <numeric>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "rqs/distributions.hpp"
#include "rqs/marginals.hpp"
#include "rqs/state.hpp"
#include "rqs/stats.hpp"

namespace {

const rqs::ProbVector kFourOutcomes{2, {0.1, 0.2, 0.3, 0.4}};

rqs::ProbVector haar(int n, std::uint64_t seed, std::uint64_t t) {
  return rqs::probabilities(rqs::sample_haar_state(n, {seed, t}));
}

} // namespace

TEST(Partition, DerivedDimensions) {
  const auto p = rqs::Partition::leading(12, 4);
  EXPECT_EQ(p.m(), 4);
  EXPECT_EQ(p.k(), 8);
  EXPECT_EQ(p.M(), 16u);
  EXPECT_EQ(p.K(), 256u);
  EXPECT_EQ(p.M() * p.K(), p.N());
  EXPECT_TRUE(p.contiguous());
  EXPECT_EQ(p.b_bits(), (std::vector<int>{4, 5, 6, 7, 8, 9, 10, 11}));
}

TEST(Partition, RejectsInvalidBits) {
  EXPECT_THROW(rqs::Partition(4, {0, 4}), rqs::ArgumentError);
  EXPECT_THROW(rqs::Partition(4, {1, 1}), rqs::ArgumentError);
  EXPECT_THROW(rqs::Partition(4, {-1}), rqs::ArgumentError);
  EXPECT_THROW(rqs::Partition(4, {}), rqs::ArgumentError);
  EXPECT_THROW(rqs::Partition::leading(4, 5), rqs::ArgumentError);
}

TEST(Partition, GatherScatterRoundTrip) {
  const rqs::Partition p(5, {3, 0, 4});
  EXPECT_FALSE(p.contiguous());
  for (std::uint64_t j = 0; j < 32; ++j)
    EXPECT_EQ(p.full_index(p.a_index(j), p.b_index(j)), j);
  // j = 0b10010: qubit 0 = 1, qubit 3 = 1 -> y = (q3 q0 q4) = 110, z = (q1 q2) = 00
  EXPECT_EQ(p.a_index(0b10010), 0b110u);
  EXPECT_EQ(p.b_index(0b10010), 0b00u);
}

TEST(Marginalize, UniformStaysUniform) {
  rqs::ProbVector p{6, std::vector<double>(64, 1.0 / 64)};
  for (const auto &part : {rqs::Partition::leading(6, 2), rqs::Partition(6, {5, 1, 3})}) {
    for (double v : rqs::marginalize(p, part))
      EXPECT_DOUBLE_EQ(v, 1.0 / static_cast<double>(part.M()));
  }
}

TEST(Marginalize, HighBitArithmetic) {
  const auto pa = rqs::marginalize(kFourOutcomes, rqs::Partition::leading(2, 1));
  ASSERT_EQ(pa.size(), 2u);
  EXPECT_NEAR(pa[0], 0.3, 1e-15);
  EXPECT_NEAR(pa[1], 0.7, 1e-15);
  // A = low bit instead
  const auto low = rqs::marginalize(kFourOutcomes, rqs::Partition(2, {1}));
  EXPECT_NEAR(low[0], 0.4, 1e-15);
  EXPECT_NEAR(low[1], 0.6, 1e-15);
}

TEST(Marginalize, RejectsMismatchedPartition) {
  EXPECT_THROW(rqs::marginalize(kFourOutcomes, rqs::Partition::leading(3, 1)),
               rqs::ArgumentError);
}

TEST(Marginalize, DepolarizedMatchesDirectSummation) {
  const auto p = haar(10, 3, 0);
  const auto part = rqs::Partition(10, {2, 7, 9});
  for (double lambda : {0.0, 0.3, 1.0}) {
    const auto d = rqs::depolarize(p, lambda);
    const auto affine = rqs::marginalize(d, part);
    const auto direct = rqs::marginalize(std::span<const double>(d.probs), part);
    for (std::size_t y = 0; y < affine.size(); ++y)
      EXPECT_NEAR(affine[y], direct[y], 1e-15);
  }
}

TEST(Marginalize, MatchesDirectDirichletAggregation) {
  // Marginals of n = 12, m = 4 Haar states against Dir(K, ..., K) built from
  // Gamma(K, 1) variates, 10^5 components per side.
  const auto part = rqs::Partition::leading(12, 4);
  const std::size_t per_side = 100000;
  std::vector<double> haar_pool, direct_pool;
  for (std::uint64_t t = 0; haar_pool.size() < per_side; ++t) {
    const auto pa = rqs::marginalize(haar(12, 21, t), part);
    haar_pool.insert(haar_pool.end(), pa.begin(), pa.end());
  }
  std::mt19937_64 eng(99);
  while (direct_pool.size() < per_side) {
    const auto d = oracle::dirichlet(eng, part.M(), static_cast<double>(part.K()));
    direct_pool.insert(direct_pool.end(), d.begin(), d.end());
  }
  const auto r = rqs::ks_two_sample(haar_pool, direct_pool);
  EXPECT_LT(r.ks_statistic, 0.01);
  EXPECT_TRUE(r.passed) << r.ks_statistic << " vs " << r.ks_critical_1pct;
}

TEST(ConditionalSlice, Arithmetic) {
  const auto s = rqs::conditional_slice(kFourOutcomes, rqs::Partition::leading(2, 1), 0);
  EXPECT_NEAR(s.cond_probs[0], 0.25, 1e-15);
  EXPECT_NEAR(s.cond_probs[1], 0.75, 1e-15);
  EXPECT_NEAR(s.weight, 0.4, 1e-15);
}

TEST(ConditionalSlice, UniformInput) {
  rqs::ProbVector p{5, std::vector<double>(32, 1.0 / 32)};
  const auto part = rqs::Partition::leading(5, 3);
  for (std::uint64_t b = 0; b < part.K(); ++b) {
    const auto s = rqs::conditional_slice(p, part, b);
    EXPECT_DOUBLE_EQ(s.weight, 0.25);
    for (double v : s.cond_probs)
      EXPECT_DOUBLE_EQ(v, 0.125);
  }
}

TEST(ConditionalSlice, Errors) {
  const auto part = rqs::Partition::leading(2, 1);
  EXPECT_THROW(rqs::conditional_slice(kFourOutcomes, part, 2), rqs::ArgumentError);
  rqs::ProbVector zero_branch{2, {0.5, 0.0, 0.5, 0.0}};
  EXPECT_THROW(rqs::conditional_slice(zero_branch, part, 1), rqs::DegenerateSliceError);
  EXPECT_NO_THROW(rqs::conditional_slice(zero_branch, part, 0));
}

TEST(ConditionalSlice, RestoresFullSystemLaw) {
  // n = 12, m = 6, b = 0: conditional components follow Beta(1, M - 1).
  const auto part = rqs::Partition::leading(12, 6);
  std::vector<double> pool;
  for (std::uint64_t t = 0; pool.size() < 100000; ++t) {
    const auto s = rqs::conditional_slice(haar(12, 22, t), part, 0);
    pool.insert(pool.end(), s.cond_probs.begin(), s.cond_probs.end());
  }
  const auto r = rqs::ks_one_sample(pool, rqs::conditional_beta(part.M(), 0.0, false));
  EXPECT_LT(r.ks_statistic, 0.01);
  EXPECT_TRUE(r.passed);
}

TEST(NoisyConditional, ExactLimits) {
  const auto p = haar(8, 5, 0);
  const auto part = rqs::Partition::leading(8, 5);
  for (std::uint64_t b = 0; b < part.K(); ++b) {
    const auto ideal = rqs::conditional_slice(p, part, b);
    const auto clean = rqs::noisy_conditional_exact(rqs::depolarize(p, 0.0), part, b);
    EXPECT_EQ(clean.cond_probs, ideal.cond_probs);
    EXPECT_EQ(clean.weight, ideal.weight);
    const auto mixed = rqs::noisy_conditional_exact(rqs::depolarize(p, 1.0), part, b);
    for (double v : mixed.cond_probs)
      EXPECT_EQ(v, 1.0 / 32);
  }
}

TEST(NoisyConditional, AffineApproximationLimits) {
  const auto ideal = rqs::conditional_slice(haar(8, 6, 0), rqs::Partition::leading(8, 5), 3);
  EXPECT_EQ(rqs::noisy_conditional_affine(ideal, 0.0), ideal.cond_probs);
  rqs::ConditionalSlice uniform{ideal.partition, 0, std::vector<double>(32, 1.0 / 32), 0.125};
  for (double v : rqs::noisy_conditional_affine(uniform, 0.4))
    EXPECT_DOUBLE_EQ(v, 1.0 / 32);
  EXPECT_THROW(rqs::noisy_conditional_affine(ideal, 1.5), rqs::ArgumentError);
}

TEST(NoisyConditional, ExactSliceFollowsShiftedConditionalLaw) {
  const double lambda = 0.3;
  const auto part = rqs::Partition::leading(12, 6);
  std::vector<double> pool;
  for (std::uint64_t t = 0; pool.size() < 100000; ++t) {
    const auto d = rqs::depolarize(haar(12, 23, t), lambda);
    const auto s = rqs::noisy_conditional_exact(d, part, 0);
    for (double v : s.cond_probs)
      pool.push_back(static_cast<double>(part.M()) * v);
  }
  const auto r = rqs::ks_one_sample(pool, rqs::conditional_beta(part.M(), lambda));
  EXPECT_LT(r.ks_statistic, 0.02);
}

TEST(NoisyConditional, TypicalityGapShrinksAsBranchWeightConcentrates) {
  // Reported, not bounded: the approximation replaces p(b) by its mean 1/K,
  // and p(b) has relative spread ~ 1/sqrt(M), so larger A means a smaller gap.
  const double lambda = 0.3;
  const int trials = 200;
  std::vector<double> gaps;
  for (int m : {4, 6}) {
    const auto part = rqs::Partition::leading(12, m);
    double gap = 0.0;
    for (int t = 0; t < trials; ++t) {
      const auto p = haar(12, 24, static_cast<std::uint64_t>(t));
      const auto exact = rqs::noisy_conditional_exact(rqs::depolarize(p, lambda), part, 0);
      const auto approx = rqs::noisy_conditional_affine(rqs::conditional_slice(p, part, 0), lambda);
      gap += rqs::mean_abs_deviation(exact.cond_probs, approx);
    }
    // normalise by 1/M so the two subsystem sizes are comparable
    gaps.push_back(gap / trials * static_cast<double>(part.M()));
    std::cout << "n=12 m=" << m << " lambda=0.3 typicality gap (scaled) = " << gaps.back() << "\n";
  }
  EXPECT_GT(gaps[0], 0.0);
  EXPECT_LT(gaps[1], gaps[0]);
}

TEST(Invariants, ConditioningThenAveragingGivesMarginal) {
  for (const auto &part : {rqs::Partition::leading(10, 4), rqs::Partition(10, {9, 0, 5})}) {
    const auto p = haar(10, 40, 0);
    std::vector<double> recon(part.M(), 0.0);
    for (std::uint64_t b = 0; b < part.K(); ++b) {
      const auto s = rqs::conditional_slice(p, part, b);
      for (std::size_t y = 0; y < recon.size(); ++y)
        recon[y] += s.weight * s.cond_probs[y];
    }
    const auto marginal = rqs::marginalize(p, part);
    for (std::size_t y = 0; y < recon.size(); ++y)
      EXPECT_NEAR(recon[y], marginal[y], 1e-12);
  }
}

TEST(Invariants, SelfSimilarityForEveryCutAndBranch) {
  // n = 10: for each m, pool the conditional components of every branch b
  // (branches use disjoint amplitudes, so they are independent draws) and
  // also test each branch on its own. Per-branch tests run at the 1% level,
  // so a few rejections are expected; the rejection rate must stay near 1%.
  const int n = 10;
  std::size_t tests = 0, rejections = 0;
  for (int m = 1; m < n; ++m) {
    const auto part = rqs::Partition::leading(n, m);
    const std::size_t trials = std::max<std::size_t>(400, 20000 / part.M());
    std::vector<std::vector<double>> per_b(part.K());
    std::vector<double> pooled;
    for (std::size_t t = 0; t < trials; ++t) {
      const auto p = haar(n, 1000 + static_cast<std::uint64_t>(m), t);
      for (std::uint64_t b = 0; b < part.K(); ++b) {
        const auto s = rqs::conditional_slice(p, part, b);
        per_b[b].insert(per_b[b].end(), s.cond_probs.begin(), s.cond_probs.end());
      }
    }
    const auto law = rqs::conditional_beta(part.M(), 0.0, false);
    for (const auto &pool : per_b) {
      ++tests;
      if (!rqs::ks_one_sample(pool, law).passed)
        ++rejections;
      pooled.insert(pooled.end(), pool.begin(), pool.end());
    }
    EXPECT_TRUE(rqs::ks_one_sample(pooled, law).passed) << "m=" << m;
  }
  std::cout << rejections << " of " << tests << " per-branch KS tests rejected at 1%\n";
  EXPECT_LE(static_cast<double>(rejections), 0.01 * tests + 3.0 * std::sqrt(0.01 * tests) + 1);
}

TEST(Invariants, BranchWeightIndependentOfConditionalComponents) {
  const int trials = 10000;
  const auto part = rqs::Partition::leading(8, 3);
  std::vector<double> weight(trials);
  std::vector<std::vector<double>> comp(part.M(), std::vector<double>(trials));
  for (int t = 0; t < trials; ++t) {
    const auto s = rqs::conditional_slice(haar(8, 50, static_cast<std::uint64_t>(t)), part, 0);
    weight[t] = s.weight;
    for (std::size_t y = 0; y < part.M(); ++y)
      comp[y][t] = s.cond_probs[y];
  }
  const double bound = 4.0 / std::sqrt(static_cast<double>(trials));
  for (std::size_t y = 0; y < part.M(); ++y)
    EXPECT_LT(std::abs(rqs::pearson(weight, comp[y])), bound) << "y=" << y;
}

TEST(Invariants, NoiseCommutesWithSlicingAtEndpoints) {
  const auto p = haar(9, 60, 0);
  const auto part = rqs::Partition(9, {8, 1, 4, 2});
  for (std::uint64_t b = 0; b < part.K(); b += 5) {
    const auto ideal = rqs::conditional_slice(p, part, b);
    EXPECT_EQ(rqs::noisy_conditional_exact(rqs::depolarize(p, 0.0), part, b).cond_probs,
              rqs::noisy_conditional_affine(ideal, 0.0));
    const auto full = rqs::noisy_conditional_exact(rqs::depolarize(p, 1.0), part, b).cond_probs;
    const auto approx = rqs::noisy_conditional_affine(ideal, 1.0);
    for (std::size_t y = 0; y < full.size(); ++y)
      EXPECT_EQ(full[y], approx[y]);
  }
}
