#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "hetexp/exp_poly_mix.hpp"
#include "hetexp/numeric.hpp"

namespace hetexp {

/// s_0..s_n of the rates, from the coefficients of prod_i (1 + rate_i t).
inline std::vector<double> elementary_symmetric(std::span<const double> rates) {
  std::vector<double> s(rates.size() + 1, 0.0);
  s[0] = 1.0;
  for (std::size_t i = 0; i < rates.size(); ++i) {
    for (std::size_t j = i + 1; j > 0; --j) s[j] += rates[i] * s[j - 1];
  }
  for (double v : s) {
    if (!std::isfinite(v)) throw NumericalError("elementary_symmetric: overflow");
  }
  return s;
}

inline std::vector<double> elementary_symmetric(const RateVector& rates) {
  return elementary_symmetric(rates.values());
}

/// M_k = (s_k / C(n, k))^(1/k) for k = 1..n. Nonincreasing in k.
inline std::vector<double> maclaurin_chain(const RateVector& rates) {
  const auto s = elementary_symmetric(rates);
  const int n = rates.n();
  std::vector<double> m;
  m.reserve(static_cast<std::size_t>(n));
  for (int k = 1; k <= n; ++k) {
    m.push_back(std::pow(s[static_cast<std::size_t>(k)] / binomial(n, k), 1.0 / k));
  }
  return m;
}

enum class ThresholdMethod { eq1, eq2, range_closed_form };

inline const char* to_string(ThresholdMethod m) {
  switch (m) {
    case ThresholdMethod::eq1: return "eq1";
    case ThresholdMethod::eq2: return "eq2";
    case ThresholdMethod::range_closed_form: return "range-closed-form";
  }
  return "?";
}

/// Critical homogeneous rate for an order statistic (m empty) or spacing.
/// tau_star / tau_low belong to the step from the k-th to the (k+1)-th
/// order statistic and are empty when k = n or for spacings.
struct ThresholdReport {
  std::optional<int> m;
  int k = 1;
  int n = 1;
  double critical_gamma = 0.0;
  std::optional<double> tau_star;
  std::optional<double> tau_low;
  ThresholdMethod method = ThresholdMethod::eq1;
};

/// Homogeneous sample outruns the heterogeneous one in the usual
/// stochastic order iff gamma >= (s_k / C(n, k))^(1/k).
inline ThresholdReport threshold_order_stat(const RateVector& rates, int k) {
  const int n = rates.n();
  if (k < 1 || k > n) {
    throw InvalidArgument("threshold_order_stat: k must satisfy 1 <= k <= n (k = " +
                          std::to_string(k) + ", n = " + std::to_string(n) + ")");
  }
  const auto s = elementary_symmetric(rates);
  ThresholdReport r;
  r.k = k;
  r.n = n;
  r.method = ThresholdMethod::eq1;
  r.critical_gamma = std::pow(s[static_cast<std::size_t>(k)] / binomial(n, k), 1.0 / k);
  if (k < n) {
    const double total = rates.total();
    const double ratio = n * s[static_cast<std::size_t>(k + 1)] / total / binomial(n, k + 1);
    r.tau_star = std::pow(ratio, 1.0 / k);
    const auto sorted = rates.sorted();
    CompensatedSum low;
    for (int i = 0; i < n - k; ++i) low += sorted[static_cast<std::size_t>(i)];
    r.tau_low = low.value() / (n - k);
  }
  return r;
}

/// Subset bitmask together with its ordering weight.
struct SubsetWeight {
  std::uint32_t mask;
  double weight;
};

inline constexpr int kMaxSubsetDpRates = 20;

/// For every m-subset R of the sample, W(R) = probability that the first m
/// failures are exactly the members of R: the sum over orderings of R of
/// prod_j rate_{r_j} / (total - rate_{r_1} - ... - rate_{r_{j-1}}).
/// Computed by forward dynamic programming over subsets of size <= m.
inline std::vector<SubsetWeight> ordering_weights(const RateVector& rates, int m) {
  const int n = rates.n();
  if (m < 0 || m > n) throw InvalidArgument("ordering_weights: m out of range");
  if (n > kMaxSubsetDpRates) {
    throw LimitExceeded("ordering_weights: n exceeds " + std::to_string(kMaxSubsetDpRates));
  }
  const std::uint32_t full = (std::uint32_t{1} << n) - 1;
  std::vector<double> w(std::size_t{1} << n, 0.0);
  // remaining[mask] = rate sum over the complement of mask, summed directly
  std::vector<double> remaining(std::size_t{1} << n, 0.0);
  for (std::uint32_t mask = 0; mask <= full; ++mask) {
    const std::uint32_t comp = full & ~mask;
    if (comp == 0) continue;
    CompensatedSum acc;
    for (int i = 0; i < n; ++i) {
      if (comp & (std::uint32_t{1} << i)) acc += rates[static_cast<std::size_t>(i)];
    }
    remaining[mask] = acc.value();
  }
  w[0] = 1.0;
  std::vector<SubsetWeight> out;
  for (std::uint32_t mask = 0; mask <= full; ++mask) {
    const int size = std::popcount(mask);
    if (size == m) {
      out.push_back({mask, w[mask]});
      continue;
    }
    if (size > m || w[mask] == 0.0) continue;
    for (int i = 0; i < n; ++i) {
      const std::uint32_t bit = std::uint32_t{1} << i;
      if (mask & bit) continue;
      w[mask | bit] += w[mask] * rates[static_cast<std::size_t>(i)] / remaining[mask];
    }
  }
  return out;
}

/// Rates of the sample with the members of `mask` removed.
inline std::vector<double> rates_without(const RateVector& rates, std::uint32_t mask) {
  std::vector<double> out;
  for (std::size_t i = 0; i < rates.size(); ++i) {
    if (!(mask & (std::uint32_t{1} << i))) out.push_back(rates[i]);
  }
  return out;
}

/// sum over size-m subsets R of s_{k-m}(rates \ R) W(R).
inline double spacing_threshold_rhs(const RateVector& rates, int m, int k) {
  CompensatedSum acc;
  for (const auto& sw : ordering_weights(rates, m)) {
    const auto rest = rates_without(rates, sw.mask);
    acc += elementary_symmetric(rest)[static_cast<std::size_t>(k - m)] * sw.weight;
  }
  return acc.value();
}

/// Critical homogeneous rate for the spacing X_{k:n} - X_{m:n}.
inline ThresholdReport threshold_spacing(const RateVector& rates, int m, int k) {
  const int n = rates.n();
  if (!(1 <= m && m < k && k <= n)) {
    throw InvalidArgument("threshold_spacing: indices must satisfy 1 <= m < k <= n (m = " +
                          std::to_string(m) + ", k = " + std::to_string(k) +
                          ", n = " + std::to_string(n) + ")");
  }
  ThresholdReport r;
  r.m = m;
  r.k = k;
  r.n = n;
  r.method = ThresholdMethod::eq2;
  const double rhs = spacing_threshold_rhs(rates, m, k);
  r.critical_gamma = std::pow(rhs / binomial(n - m, k - m), 1.0 / (k - m));
  return r;
}

/// Sample range (m = 1, k = n): gamma* = (prod rates / (total / n))^(1/(n-1)).
inline ThresholdReport threshold_range(const RateVector& rates) {
  const int n = rates.n();
  if (n < 2) throw InvalidArgument("threshold_range: need n >= 2");
  double log_prod = 0.0;
  for (double r : rates.values()) log_prod += std::log(r);
  ThresholdReport rep;
  rep.m = 1;
  rep.k = n;
  rep.n = n;
  rep.method = ThresholdMethod::range_closed_form;
  rep.critical_gamma = std::exp((log_prod - std::log(rates.total() / n)) / (n - 1));
  return rep;
}

}  // namespace hetexp
