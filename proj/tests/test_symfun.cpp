#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <vector>

#include "hetexp/symfun.hpp"
#include "oracles.hpp"

using namespace hetexp;

namespace {

std::vector<double> random_rates(std::mt19937_64& rng, std::size_t n) {
  std::uniform_real_distribution<double> u(std::log(0.1), std::log(10.0));
  std::vector<double> r(n);
  for (auto& v : r) v = std::exp(u(rng));
  return r;
}

std::vector<double> scaled(std::vector<double> r, double c) {
  for (auto& v : r) v *= c;
  return r;
}

}  // namespace

TEST(ElementarySymmetric, Examples) {
  const auto s = elementary_symmetric(RateVector({1.0, 2.0, 3.0}));
  ASSERT_EQ(s.size(), 4u);
  EXPECT_EQ(s[0], 1.0);
  EXPECT_EQ(s[1], 6.0);
  EXPECT_EQ(s[2], 11.0);
  EXPECT_EQ(s[3], 6.0);
  EXPECT_EQ(elementary_symmetric(RateVector({1.0, 2.0, 3.0})),
            oracle::elem_sym_by_subsets({1.0, 2.0, 3.0}));

  const auto ones = elementary_symmetric(RateVector({1.0, 1.0, 1.0, 1.0}));
  const std::vector<double> binom{1.0, 4.0, 6.0, 4.0, 1.0};
  EXPECT_EQ(ones, binom);

  const auto base = elementary_symmetric(RateVector({0.5, 1.5, 4.0}));
  const auto sc = elementary_symmetric(RateVector({1.5, 4.5, 12.0}));
  for (std::size_t k = 0; k < base.size(); ++k) {
    EXPECT_NEAR(sc[k], base[k] * std::pow(3.0, static_cast<double>(k)), 1e-12 * sc[k]);
  }
}

TEST(ElementarySymmetric, MatchesSubsetEnumeration) {
  std::mt19937_64 rng(101);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 1 + trial % 10;
    const auto r = random_rates(rng, n);
    const auto s = elementary_symmetric(RateVector(r));
    const auto o = oracle::elem_sym_by_subsets(r);
    for (std::size_t k = 0; k <= n; ++k) EXPECT_NEAR(s[k], o[k], 1e-12 * o[k]);
  }
}

TEST(ElementarySymmetric, OverflowIsReported) {
  const std::vector<double> huge(8, 1e300);
  EXPECT_THROW(elementary_symmetric(RateVector(huge)), NumericalError);
}

TEST(ThresholdOrderStat, Examples) {
  const RateVector r({1.0, 2.0, 3.0});
  const auto rep = threshold_order_stat(r, 2);
  const auto s = oracle::elem_sym_by_subsets({1.0, 2.0, 3.0});
  EXPECT_NEAR(rep.critical_gamma, std::sqrt(s[2] / 3.0), 1e-15);
  EXPECT_NEAR(rep.critical_gamma, 1.9148542, 1e-7);
  EXPECT_EQ(rep.method, ThresholdMethod::eq1);
  EXPECT_FALSE(rep.m.has_value());
  EXPECT_EQ(rep.k, 2);
  EXPECT_EQ(rep.n, 3);

  EXPECT_NEAR(threshold_order_stat(r, 1).critical_gamma, 2.0, 1e-15);
  for (int k = 1; k <= 4; ++k) {
    EXPECT_NEAR(threshold_order_stat(RateVector({1.7, 1.7, 1.7, 1.7}), k).critical_gamma, 1.7,
                1e-14);
  }
}

TEST(ThresholdOrderStat, ProofBands) {
  // rates (1,2,3), k = 1: tau_star = (3 s_2 / 6 / 3)^1 = 11/6, tau_low = (1+2)/2
  const auto rep = threshold_order_stat(RateVector({1.0, 2.0, 3.0}), 1);
  ASSERT_TRUE(rep.tau_star.has_value());
  ASSERT_TRUE(rep.tau_low.has_value());
  EXPECT_NEAR(*rep.tau_star, 11.0 / 6.0, 1e-15);
  EXPECT_NEAR(*rep.tau_low, 1.5, 1e-15);

  const auto last = threshold_order_stat(RateVector({1.0, 2.0, 3.0}), 3);
  EXPECT_FALSE(last.tau_star.has_value());
  EXPECT_FALSE(last.tau_low.has_value());
}

TEST(ThresholdOrderStat, LowBandBelowStarForUnequalRates) {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 2 + trial % 7;
    const RateVector r(random_rates(rng, n));
    for (int k = 1; k < static_cast<int>(n); ++k) {
      const auto rep = threshold_order_stat(r, k);
      EXPECT_LT(*rep.tau_low, *rep.tau_star) << "trial " << trial << " k " << k;
    }
  }
}

TEST(ThresholdOrderStat, RejectsBadIndex) {
  EXPECT_THROW(threshold_order_stat(RateVector({1.0, 2.0}), 0), InvalidArgument);
  EXPECT_THROW(threshold_order_stat(RateVector({1.0, 2.0}), 3), InvalidArgument);
}

TEST(ThresholdSpacing, Examples) {
  const RateVector r({1.0, 2.0, 3.0});
  EXPECT_NEAR(spacing_threshold_rhs(r, 1, 3), 3.0, 1e-15);
  EXPECT_NEAR(spacing_threshold_rhs(r, 1, 3), oracle::spacing_rhs_by_permutations({1, 2, 3}, 1, 3),
              1e-15);
  const auto rep = threshold_spacing(r, 1, 3);
  EXPECT_NEAR(rep.critical_gamma, std::sqrt(3.0), 1e-15);
  EXPECT_NEAR(rep.critical_gamma, 1.7320508, 1e-7);
  EXPECT_EQ(rep.method, ThresholdMethod::eq2);
  EXPECT_EQ(rep.m.value(), 1);
  EXPECT_NEAR(threshold_range(r).critical_gamma, std::sqrt(3.0), 1e-15);
  EXPECT_EQ(threshold_range(r).method, ThresholdMethod::range_closed_form);

  EXPECT_NEAR(threshold_spacing(RateVector({2.5, 2.5, 2.5, 2.5}), 2, 4).critical_gamma, 2.5,
              1e-14);
}

TEST(ThresholdSpacing, DpMatchesPermutations) {
  std::mt19937_64 rng(2024);
  for (std::size_t n = 2; n <= 6; ++n) {
    for (int trial = 0; trial < 5; ++trial) {
      const auto r = random_rates(rng, n);
      const RateVector rv(r);
      for (int m = 1; m < static_cast<int>(n); ++m) {
        for (int k = m + 1; k <= static_cast<int>(n); ++k) {
          const double dp = spacing_threshold_rhs(rv, m, k);
          const double brute = oracle::spacing_rhs_by_permutations(r, m, k);
          EXPECT_NEAR(dp, brute, 1e-12 * brute) << n << " " << m << " " << k;
        }
      }
    }
  }
}

TEST(ThresholdSpacing, RangeMatchesClosedForm) {
  std::mt19937_64 rng(99);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 2 + trial % 9;
    const RateVector r(random_rates(rng, n));
    const double dp = threshold_spacing(r, 1, static_cast<int>(n)).critical_gamma;
    const double closed = threshold_range(r).critical_gamma;
    EXPECT_NEAR(dp, closed, 1e-12 * closed);
  }
}

TEST(ThresholdSpacing, OrderingWeightsSumToOne) {
  const RateVector r({0.3, 1.0, 2.2, 5.0, 7.5});
  for (int m = 0; m <= 5; ++m) {
    CompensatedSum s;
    std::size_t count = 0;
    for (const auto& w : ordering_weights(r, m)) {
      s += w.weight;
      ++count;
    }
    EXPECT_NEAR(s.value(), 1.0, 1e-14);
    EXPECT_EQ(count, static_cast<std::size_t>(binomial(5, m)));
  }
}

TEST(ThresholdSpacing, RejectsBadIndices) {
  const RateVector r({1.0, 2.0, 3.0});
  EXPECT_THROW(threshold_spacing(r, 0, 2), InvalidArgument);
  EXPECT_THROW(threshold_spacing(r, 2, 2), InvalidArgument);
  EXPECT_THROW(threshold_spacing(r, 1, 4), InvalidArgument);
  EXPECT_THROW(threshold_range(RateVector({1.0})), InvalidArgument);
  EXPECT_THROW(ordering_weights(RateVector(std::vector<double>(21, 1.0)), 2), LimitExceeded);
}

TEST(Thresholds, ScaleEquivariance) {
  std::mt19937_64 rng(31);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t n = 2 + trial % 6;
    const auto r = random_rates(rng, n);
    for (double c : {0.1, 1.0, 10.0}) {
      const RateVector base(r), sc(scaled(r, c));
      for (int k = 1; k <= static_cast<int>(n); ++k) {
        const double g = threshold_order_stat(base, k).critical_gamma;
        EXPECT_NEAR(threshold_order_stat(sc, k).critical_gamma, c * g, 1e-12 * c * g);
        for (int m = 1; m < k; ++m) {
          const double gs = threshold_spacing(base, m, k).critical_gamma;
          EXPECT_NEAR(threshold_spacing(sc, m, k).critical_gamma, c * gs, 1e-12 * c * gs);
        }
      }
      const double gr = threshold_range(base).critical_gamma;
      EXPECT_NEAR(threshold_range(sc).critical_gamma, c * gr, 1e-12 * c * gr);
    }
  }
}

TEST(MaclaurinChain, Examples) {
  const auto m = maclaurin_chain(RateVector({1.0, 2.0, 3.0}));
  ASSERT_EQ(m.size(), 3u);
  EXPECT_NEAR(m[0], 2.0, 1e-15);
  EXPECT_NEAR(m[1], std::sqrt(11.0 / 3.0), 1e-15);
  EXPECT_NEAR(m[2], std::cbrt(6.0), 1e-15);
  EXPECT_NEAR(m[1], 1.91485, 1e-5);
  EXPECT_NEAR(m[2], 1.81712, 1e-5);

  for (double v : maclaurin_chain(RateVector({0.4, 0.4, 0.4}))) EXPECT_NEAR(v, 0.4, 1e-15);
}

TEST(MaclaurinChain, StrictlyDecreasingForUnequalRates) {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = 2 + trial % 9;
    const auto r = random_rates(rng, n);
    const auto m = maclaurin_chain(RateVector(r));
    double mean = 0.0;
    for (double v : r) mean += v;
    EXPECT_NEAR(m[0], mean / static_cast<double>(n), 1e-13 * m[0]);
    for (std::size_t k = 1; k < m.size(); ++k) EXPECT_LT(m[k], m[k - 1] - 1e-12 * m[k - 1]);
  }
}
