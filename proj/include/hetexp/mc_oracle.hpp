#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "hetexp/distribution.hpp"
#include "hetexp/order_stats.hpp"

namespace hetexp {

struct SampleBatch {
  std::vector<double> draws;
  std::uint64_t seed = 0;
  std::string statistic;
};

inline constexpr std::size_t kMaxDraws = std::size_t{1} << 28;

namespace detail {

// Uniform on the open interval (0, 1) from the top 53 bits.
inline double open_uniform(std::mt19937_64& rng) {
  return (static_cast<double>(rng() >> 11) + 0.5) * 0x1.0p-53;
}

inline std::string describe(const SampleSource& src) {
  if (const auto* h = std::get_if<HomogeneousRate>(&src)) {
    return "gamma=" + std::to_string(h->value());
  }
  std::string s = "rates=[";
  const auto& r = std::get<RateVector>(src);
  for (std::size_t i = 0; i < r.size(); ++i) {
    if (i) s += ",";
    s += std::to_string(r[i]);
  }
  return s + "]";
}

// One sorted sample of component lifetimes per draw; `fn` maps it to the statistic.
template <class Fn>
SampleBatch sample_sorted(const std::vector<double>& rates, std::size_t n_draws,
                          std::uint64_t seed, std::string label, Fn fn) {
  if (n_draws < 1) throw InvalidArgument("sample: n_draws must be >= 1");
  if (n_draws > kMaxDraws) throw LimitExceeded("sample: n_draws exceeds cap");
  std::mt19937_64 rng(seed);
  SampleBatch batch;
  batch.seed = seed;
  batch.statistic = std::move(label);
  batch.draws.reserve(n_draws);
  std::vector<double> life(rates.size());
  for (std::size_t d = 0; d < n_draws; ++d) {
    for (std::size_t i = 0; i < rates.size(); ++i) {
      life[i] = -std::log(open_uniform(rng)) / rates[i];
    }
    std::sort(life.begin(), life.end());
    batch.draws.push_back(fn(life));
  }
  return batch;
}

}  // namespace detail

/// Inverse-transform draws of X_{k:n}; deterministic in `seed`.
inline SampleBatch sample_order_stat(const OrderStatSpec& spec, std::size_t n_draws,
                                     std::uint64_t seed) {
  spec.validate();
  const auto k = static_cast<std::size_t>(spec.k - 1);
  return detail::sample_sorted(
      spec.component_rates(), n_draws, seed,
      "X_{" + std::to_string(spec.k) + ":" + std::to_string(spec.n) + "} " +
          detail::describe(spec.source),
      [k](const std::vector<double>& life) { return life[k]; });
}

/// Inverse-transform draws of X_{k:n} - X_{m:n}.
inline SampleBatch sample_spacing(const SpacingSpec& spec, std::size_t n_draws,
                                  std::uint64_t seed) {
  spec.validate();
  const auto k = static_cast<std::size_t>(spec.k - 1);
  const auto m = static_cast<std::size_t>(spec.m - 1);
  return detail::sample_sorted(
      spec.component_rates(), n_draws, seed,
      "X_{" + std::to_string(spec.k) + ":" + std::to_string(spec.n) + "} - X_{" +
          std::to_string(spec.m) + ":" + std::to_string(spec.n) + "} " +
          detail::describe(spec.source),
      [k, m](const std::vector<double>& life) { return life[k] - life[m]; });
}

/// sup_x |F_N(x) - F(x)|.
template <Distribution D>
double ks_distance(const SampleBatch& batch, const D& d) {
  if (batch.draws.empty()) throw InvalidArgument("ks_distance: empty batch");
  std::vector<double> xs = batch.draws;
  std::sort(xs.begin(), xs.end());
  const double n = static_cast<double>(xs.size());
  double sup = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double f = d.evaluate(xs[i]).lower;
    sup = std::max({sup, static_cast<double>(i + 1) / n - f, f - static_cast<double>(i) / n});
  }
  return sup;
}

/// Asymptotic 99% critical value of the one-sample KS statistic.
inline double ks_critical_99(std::size_t n) { return 1.628 / std::sqrt(static_cast<double>(n)); }

struct KsResult {
  double distance;
  double critical;
  bool passed;
};

template <Distribution D>
KsResult ks_test(const SampleBatch& batch, const D& d) {
  const double dist = ks_distance(batch, d);
  const double crit = ks_critical_99(batch.draws.size());
  return {dist, crit, dist <= crit};
}

/// Sample mean, variance, cv and delta-method standard errors.
struct EmpiricalMoments {
  double mean = 0.0;
  double variance = 0.0;
  double cv = 0.0;
  double mean_se = 0.0;
  double cv_se = 0.0;
};

inline EmpiricalMoments empirical_moments(const SampleBatch& batch) {
  const auto& x = batch.draws;
  if (x.size() < 2) throw InvalidArgument("empirical_moments: need at least two draws");
  const double n = static_cast<double>(x.size());
  CompensatedSum s1;
  for (double v : x) s1 += v;
  const double mean = s1.value() / n;
  CompensatedSum c2, c3, c4;
  for (double v : x) {
    const double d = v - mean;
    c2 += d * d;
    c3 += d * d * d;
    c4 += d * d * d * d;
  }
  const double m2 = c2.value() / n, m3 = c3.value() / n, m4 = c4.value() / n;
  EmpiricalMoments out;
  out.mean = mean;
  out.variance = c2.value() / (n - 1.0);
  const double sd = std::sqrt(m2);
  out.cv = std::sqrt(out.variance) / mean;
  out.mean_se = std::sqrt(out.variance / n);
  // cv = g(mean, m2) = sqrt(m2) / mean
  const double gm = -sd / (mean * mean);
  const double gv = 1.0 / (2.0 * sd * mean);
  const double var_cv = (gm * gm * m2 + gv * gv * (m4 - m2 * m2) + 2.0 * gm * gv * m3) / n;
  out.cv_se = std::sqrt(std::max(var_cv, 0.0));
  return out;
}

}  // namespace hetexp
