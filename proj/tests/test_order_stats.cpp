#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "hetexp/exp_poly_mix.hpp"
#include "hetexp/order_stats.hpp"
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

// 256 points on [0, q(1 - 1e-9)] of the given order statistic
std::vector<double> grid256(const OrderStatistic& d) {
  const double hi = d.quantile(1.0 - 1e-9);
  std::vector<double> xs;
  for (int i = 0; i < 256; ++i) xs.push_back(hi * i / 255.0);
  return xs;
}

double max_cdf_gap(const ExpPolyMix& a, const ExpPolyMix& b, const std::vector<double>& xs) {
  double worst = 0.0;
  for (double x : xs) worst = std::max(worst, std::abs(a.cdf(x) - b.cdf(x)));
  return worst;
}

}  // namespace

TEST(BuildOrderStatDirect, Examples) {
  const RateVector r({1.0, 2.0});
  const auto min = build_order_stat_direct(OrderStatSpec::heterogeneous(r, 1));
  EXPECT_TRUE(approx_equal(min, ExpPolyMix::exponential(3.0), 1e-15));
  const auto hmin = build_order_stat_direct(OrderStatSpec::homogeneous(0.7, 4, 1));
  EXPECT_TRUE(approx_equal(hmin, ExpPolyMix::exponential(2.8), 1e-15));

  const auto max = build_order_stat_direct(OrderStatSpec::heterogeneous(r, 2));
  const double product = (1.0 - std::exp(-1.0)) * (1.0 - std::exp(-2.0));
  EXPECT_NEAR(max.cdf(1.0), product, 1e-15);
  EXPECT_NEAR(max.cdf(1.0), 0.5465724, 1e-7);
  EXPECT_NEAR(max.cdf(1.0), oracle::at_least_k_failed({1.0, 2.0}, 2, 1.0), 1e-15);

  const auto h = build_order_stat_direct(OrderStatSpec::homogeneous(1.0, 3, 2));
  const double p = 1.0 - std::exp(-1.0);
  EXPECT_NEAR(h.cdf(1.0), 3.0 * p * p * (1.0 - p) + p * p * p, 1e-15);
  EXPECT_NEAR(h.cdf(1.0), oracle::at_least_k_failed({1.0, 1.0, 1.0}, 2, 1.0), 1e-15);
  EXPECT_NEAR(h.cdf(1.0), 0.6935683, 1e-7);
}

TEST(BuildOrderStatDirect, RejectsBadSpecs) {
  EXPECT_THROW(OrderStatSpec::heterogeneous(RateVector({1.0, 2.0}), 3), InvalidArgument);
  EXPECT_THROW(OrderStatSpec::homogeneous(1.0, 3, 0), InvalidArgument);
  EXPECT_THROW(OrderStatSpec::homogeneous(-1.0, 3, 1), InvalidArgument);
  std::vector<double> many(17);
  for (std::size_t i = 0; i < many.size(); ++i) many[i] = 1.0 + 0.1 * static_cast<double>(i);
  EXPECT_THROW(build_order_stat_direct(OrderStatSpec::heterogeneous(RateVector(many), 3)),
               LimitExceeded);
  EXPECT_THROW(build_order_stat_lemma2(OrderStatSpec::heterogeneous(RateVector(many), 3)),
               LimitExceeded);
  EXPECT_THROW(OrderStatistic(std::vector<double>(65, 1.0), 2), LimitExceeded);
}

TEST(BuildOrderStatLemma2, MatchesDirect) {
  const RateVector r({1.0, 2.0});
  const auto spec = OrderStatSpec::heterogeneous(r, 2);
  const auto xs = grid256(OrderStatistic(spec));
  EXPECT_LE(max_cdf_gap(build_order_stat_lemma2(spec), build_order_stat_direct(spec), xs), 1e-10);

  std::mt19937_64 rng(11);
  for (std::size_t n = 2; n <= 8; ++n) {
    const RateVector rv(random_rates(rng, n));
    for (int k = 1; k <= static_cast<int>(n); ++k) {
      const auto s = OrderStatSpec::heterogeneous(rv, k);
      const auto g = grid256(OrderStatistic(s));
      EXPECT_LE(max_cdf_gap(build_order_stat_lemma2(s), build_order_stat_direct(s), g), 1e-10)
          << "n " << n << " k " << k;
    }
  }
}

TEST(BuildOrderStatLemma2, EqualRatesMatchHomogeneous) {
  const auto het = build_order_stat_lemma2(OrderStatSpec::heterogeneous(RateVector({1.3, 1.3, 1.3}), 2));
  const auto hom = build_order_stat_direct(OrderStatSpec::homogeneous(1.3, 3, 2));
  EXPECT_TRUE(approx_equal(het, hom, 1e-12));
}

TEST(BuildOrderStatLemma2, PartialTiesHandled) {
  const auto spec = OrderStatSpec::heterogeneous(RateVector({0.5, 2.0, 2.0, 3.0}), 3);
  const auto xs = grid256(OrderStatistic(spec));
  EXPECT_LE(max_cdf_gap(build_order_stat_lemma2(spec), build_order_stat_direct(spec), xs), 1e-10);
}

TEST(BuildOrderStatLemma2, MaxMeanMatchesMonteCarlo) {
  const auto d = build_order_stat_lemma2(OrderStatSpec::heterogeneous(RateVector({1.0, 2.0, 3.0}), 3));
  const auto mc = oracle::monte_carlo(
      [](std::mt19937_64& rng) {
        return std::max({oracle::exp_draw(rng, 1.0), oracle::exp_draw(rng, 2.0),
                         oracle::exp_draw(rng, 3.0)});
      },
      1000000, 3);
  EXPECT_NEAR(d.mean(), mc.mean, 4.0 * mc.mean_se);
}

TEST(HomogeneousOrderStat, MatchesExponentialConvolution) {
  const double g = 0.8;
  for (int n = 2; n <= 7; ++n) {
    for (int k = 1; k <= n; ++k) {
      std::vector<double> steps;
      for (int j = n; j >= n - k + 1; --j) steps.push_back(j * g);
      const auto conv = hypoexponential(steps);
      const auto direct = build_order_stat_direct(OrderStatSpec::homogeneous(g, n, k));
      const auto xs = grid256(OrderStatistic(OrderStatSpec::homogeneous(g, n, k)));
      EXPECT_LE(max_cdf_gap(conv, direct, xs), 1e-10) << n << " " << k;
    }
  }
}

TEST(PoissonBinomial, Examples) {
  const auto spec = OrderStatSpec::heterogeneous(RateVector({1.0, 2.0}), 2);
  EXPECT_EQ(eval_cdf_poisson_binomial(spec, 0.0), 0.0);
  EXPECT_NEAR(eval_cdf_poisson_binomial(spec, 1.0), 0.5465724, 1e-7);
  EXPECT_NEAR(eval_cdf_poisson_binomial(spec, 1.0),
              (1.0 - std::exp(-1.0)) * (1.0 - std::exp(-2.0)), 1e-16);
  EXPECT_NEAR(eval_cdf_poisson_binomial(spec, 40.0), 1.0, 1e-12);
  EXPECT_THROW(eval_cdf_poisson_binomial(spec, -1.0), InvalidArgument);
}

TEST(PoissonBinomial, MatchesDirectPointwise) {
  std::mt19937_64 rng(12);
  for (std::size_t n = 2; n <= 8; ++n) {
    const auto r = random_rates(rng, n);
    for (int k = 1; k <= static_cast<int>(n); ++k) {
      const auto spec = OrderStatSpec::heterogeneous(RateVector(r), k);
      const auto direct = build_order_stat_direct(spec);
      const OrderStatistic os(spec);
      for (double x : grid256(os)) {
        EXPECT_NEAR(direct.cdf(x), os.cdf(x), 1e-9);
        EXPECT_NEAR(oracle::at_least_k_failed(r, k, x), os.cdf(x), 1e-13);
      }
    }
  }
}

TEST(PoissonBinomial, TailsAreComplementary) {
  const OrderStatistic os(std::vector<double>{0.2, 0.9, 1.7, 4.0}, 3);
  for (double x : {1e-6, 0.01, 0.5, 3.0, 30.0}) {
    const auto t = os.evaluate(x);
    EXPECT_NEAR(t.lower + t.upper, 1.0, 1e-15);
    EXPECT_GE(t.lower, 0.0);
    EXPECT_GE(t.upper, 0.0);
  }
}

TEST(PoissonBinomial, DensityMatchesSymbolic) {
  const std::vector<double> r{0.4, 1.0, 2.5, 6.0};
  for (int k = 1; k <= 4; ++k) {
    const OrderStatistic os(r, k);
    const auto sym = build_order_stat_direct(OrderStatSpec::heterogeneous(RateVector(r), k));
    for (double x : {0.0, 0.05, 0.4, 1.3, 5.0}) EXPECT_NEAR(os.pdf(x), sym.pdf(x), 1e-10) << k;
  }
}

TEST(SmallX, LeadingCoefficientIsElementarySymmetric) {
  // F_{k:(n-1)} on the rates without component i behaves as s_k x^k
  std::mt19937_64 rng(13);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t n = 3 + trial % 5;
    const auto r = random_rates(rng, n);
    for (std::size_t i = 0; i < n; ++i) {
      std::vector<double> rest = r;
      rest.erase(rest.begin() + static_cast<std::ptrdiff_t>(i));
      for (int k = 1; k <= static_cast<int>(rest.size()); ++k) {
        const OrderStatistic os(rest, k);
        const double x1 = 1e-4, x2 = 2e-4;
        const double f1 = os.cdf(x1), f2 = os.cdf(x2);
        const double pk = std::pow(2.0, k);
        const double fitted = (2.0 * pk * f1 - f2) / (pk * std::pow(x1, k));
        const double sk = oracle::elem_sym_by_subsets(rest)[static_cast<std::size_t>(k)];
        EXPECT_NEAR(fitted / sk, 1.0, 1e-2);
      }
    }
  }
}

TEST(BuildSpacing, Examples) {
  const auto mem = build_spacing(SpacingSpec::homogeneous(1.7, 2, 1, 2));
  EXPECT_TRUE(approx_equal(mem, ExpPolyMix::exponential(1.7), 1e-14));

  const auto sp = build_spacing(SpacingSpec::heterogeneous(RateVector({1.0, 2.0}), 1, 2));
  const std::vector<MixtureComponent> expected_parts{{1.0 / 3.0, ExpPolyMix::exponential(2.0)},
                                                     {2.0 / 3.0, ExpPolyMix::exponential(1.0)}};
  EXPECT_TRUE(approx_equal(sp, mix(expected_parts), 1e-14));
  const double closed = (1.0 - std::exp(-2.0)) / 3.0 + 2.0 * (1.0 - std::exp(-1.0)) / 3.0;
  EXPECT_NEAR(sp.cdf(1.0), closed, 1e-15);
  EXPECT_NEAR(sp.cdf(1.0), 0.7096353, 1e-7);

  std::mt19937_64 rng(21);
  int below = 0;
  const int draws = 1000000;
  for (int i = 0; i < draws; ++i) {
    const double a = oracle::exp_draw(rng, 1.0), b = oracle::exp_draw(rng, 2.0);
    if (std::abs(a - b) <= 1.0) ++below;
  }
  EXPECT_NEAR(sp.cdf(1.0), static_cast<double>(below) / draws, 3e-3);
}

TEST(BuildSpacing, MeanIsDifferenceOfMeans) {
  std::mt19937_64 rng(22);
  for (std::size_t n = 2; n <= 6; ++n) {
    const RateVector r(random_rates(rng, n));
    for (int m = 1; m < static_cast<int>(n); ++m) {
      for (int k = m + 1; k <= static_cast<int>(n); ++k) {
        const double diff = build_order_stat_direct(OrderStatSpec::heterogeneous(r, k)).mean() -
                            build_order_stat_direct(OrderStatSpec::heterogeneous(r, m)).mean();
        const double sp = build_spacing(SpacingSpec::heterogeneous(r, m, k)).mean();
        EXPECT_NEAR(sp, diff, 1e-10 * diff) << n << " " << m << " " << k;
      }
    }
  }
}

TEST(BuildSpacing, WeightsSumToOne) {
  std::mt19937_64 rng(23);
  for (std::size_t n = 2; n <= 8; ++n) {
    const RateVector r(random_rates(rng, n));
    for (int m = 1; m < static_cast<int>(n); ++m) {
      const SpacingDistribution sd(SpacingSpec::heterogeneous(r, m, static_cast<int>(n)));
      EXPECT_NEAR(sd.weight_sum(), 1.0, 1e-12);
    }
  }
}

TEST(BuildSpacing, PointwiseMatchesSymbolic) {
  std::mt19937_64 rng(24);
  for (std::size_t n = 2; n <= 6; ++n) {
    const RateVector r(random_rates(rng, n));
    for (int m = 1; m < static_cast<int>(n); ++m) {
      for (int k = m + 1; k <= static_cast<int>(n); ++k) {
        const auto spec = SpacingSpec::heterogeneous(r, m, k);
        const SpacingDistribution sd(spec);
        const auto sym = build_spacing(spec);
        const double hi = sd.quantile(1.0 - 1e-9);
        for (int i = 0; i < 64; ++i) {
          const double x = hi * i / 63.0;
          EXPECT_NEAR(sd.cdf(x), sym.cdf(x), 1e-9);
        }
      }
    }
  }
}

TEST(BuildSpacing, RejectsBadIndices) {
  EXPECT_THROW(SpacingSpec::heterogeneous(RateVector({1.0, 2.0, 3.0}), 2, 2), InvalidArgument);
  EXPECT_THROW(SpacingSpec::homogeneous(1.0, 3, 0, 2), InvalidArgument);
  EXPECT_THROW(SpacingSpec::homogeneous(1.0, 3, 1, 4), InvalidArgument);
}
