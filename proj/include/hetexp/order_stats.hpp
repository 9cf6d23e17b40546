#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <map>
#include <string>
#include <variant>
#include <vector>

#include "hetexp/distribution.hpp"
#include "hetexp/exp_poly_mix.hpp"
#include "hetexp/symfun.hpp"

namespace hetexp {

using SampleSource = std::variant<RateVector, HomogeneousRate>;

inline constexpr int kMaxSymbolicRates = 16;
inline constexpr int kMaxPointwiseRates = 64;

/// k-th smallest of n independent exponential lifetimes.
struct OrderStatSpec {
  int k;
  int n;
  SampleSource source;

  static OrderStatSpec heterogeneous(const RateVector& rates, int k) {
    OrderStatSpec s{k, rates.n(), rates};
    s.validate();
    return s;
  }

  static OrderStatSpec homogeneous(double gamma, int n, int k) {
    OrderStatSpec s{k, n, HomogeneousRate(gamma)};
    s.validate();
    return s;
  }

  void validate() const {
    if (n < 1 || k < 1 || k > n) {
      throw InvalidArgument("OrderStatSpec: need 1 <= k <= n (k = " + std::to_string(k) +
                            ", n = " + std::to_string(n) + ")");
    }
    if (const auto* r = std::get_if<RateVector>(&source); r != nullptr && r->n() != n) {
      throw InvalidArgument("OrderStatSpec: rate vector length differs from n");
    }
  }

  bool is_homogeneous() const { return std::holds_alternative<HomogeneousRate>(source); }

  /// Component rates, expanded to length n for homogeneous samples.
  std::vector<double> component_rates() const {
    if (const auto* h = std::get_if<HomogeneousRate>(&source)) {
      return std::vector<double>(static_cast<std::size_t>(n), h->value());
    }
    return std::get<RateVector>(source).vector();
  }
};

/// X_{k:n} - X_{m:n}.
struct SpacingSpec {
  int m;
  int k;
  int n;
  SampleSource source;

  static SpacingSpec heterogeneous(const RateVector& rates, int m, int k) {
    SpacingSpec s{m, k, rates.n(), rates};
    s.validate();
    return s;
  }

  static SpacingSpec homogeneous(double gamma, int n, int m, int k) {
    SpacingSpec s{m, k, n, HomogeneousRate(gamma)};
    s.validate();
    return s;
  }

  void validate() const {
    if (!(1 <= m && m < k && k <= n)) {
      throw InvalidArgument("SpacingSpec: need 1 <= m < k <= n (m = " + std::to_string(m) +
                            ", k = " + std::to_string(k) + ", n = " + std::to_string(n) + ")");
    }
    if (const auto* r = std::get_if<RateVector>(&source); r != nullptr && r->n() != n) {
      throw InvalidArgument("SpacingSpec: rate vector length differs from n");
    }
  }

  bool is_homogeneous() const { return std::holds_alternative<HomogeneousRate>(source); }

  std::vector<double> component_rates() const {
    if (const auto* h = std::get_if<HomogeneousRate>(&source)) {
      return std::vector<double>(static_cast<std::size_t>(n), h->value());
    }
    return std::get<RateVector>(source).vector();
  }
};

namespace detail {

// S(x) = P(at least r = n-k+1 components survive)
//      = sum_{j >= r} (-1)^{j-r} C(j-1, r-1) sum_{|B| = j} exp(-rate(B) x).
inline ExpPolyMix direct_heterogeneous(const std::vector<double>& rates, int k) {
  const int n = static_cast<int>(rates.size());
  const int r = n - k + 1;
  std::vector<ExpPolyTerm> raw;
  const std::uint32_t full = (std::uint32_t{1} << n) - 1;
  std::vector<double> subset_rate(std::size_t{1} << n, 0.0);
  for (std::uint32_t mask = 1; mask <= full; ++mask) {
    const int low = std::countr_zero(mask);
    subset_rate[mask] = subset_rate[mask & (mask - 1)] + rates[static_cast<std::size_t>(low)];
    const int j = std::popcount(mask);
    if (j < r) continue;
    const double sign = ((j - r) % 2 == 0) ? 1.0 : -1.0;
    raw.push_back({subset_rate[mask], {sign * binomial(j - 1, r - 1)}});
  }
  return ExpPolyMix::from_terms(std::move(raw));
}

inline ExpPolyMix direct_homogeneous(double gamma, int n, int k) {
  const int r = n - k + 1;
  std::vector<ExpPolyTerm> raw;
  for (int j = r; j <= n; ++j) {
    const double sign = ((j - r) % 2 == 0) ? 1.0 : -1.0;
    raw.push_back({j * gamma, {sign * binomial(j - 1, r - 1) * binomial(n, j)}});
  }
  return ExpPolyMix::from_terms(std::move(raw));
}

}  // namespace detail

/// Exact X_{k:n} by inclusion-exclusion over subsets of surviving components.
inline ExpPolyMix build_order_stat_direct(const OrderStatSpec& spec) {
  spec.validate();
  if (const auto* h = std::get_if<HomogeneousRate>(&spec.source)) {
    return detail::direct_homogeneous(h->value(), spec.n, spec.k);
  }
  const auto& rates = std::get<RateVector>(spec.source);
  if (rates.all_equal()) return detail::direct_homogeneous(rates[0], spec.n, spec.k);
  if (spec.n > kMaxSymbolicRates) {
    throw LimitExceeded("build_order_stat_direct: n exceeds " +
                        std::to_string(kMaxSymbolicRates));
  }
  return detail::direct_heterogeneous(rates.vector(), spec.k);
}

/// Recursive construction of the k-th order statistic: the minimum is
/// expo(total), and the remaining wait is the (k-1)-th order statistic of
/// the sample with the first failure i removed, where i is chosen with
/// probability rate_i / total. Sub-results are memoized on the sorted
/// remaining-rate multiset.
class Lemma2Builder {
 public:
  explicit Lemma2Builder(std::size_t max_memo = 1u << 16) : max_memo_(max_memo) {}

  ExpPolyMix build(const std::vector<double>& rates, int k) {
    std::vector<double> sorted = rates;
    std::sort(sorted.begin(), sorted.end());
    return build_sorted(sorted, k);
  }

  std::size_t memo_size() const { return memo_.size(); }

 private:
  using Key = std::pair<std::vector<long long>, int>;

  static Key make_key(const std::vector<double>& sorted, int k) {
    std::vector<long long> q;
    q.reserve(sorted.size());
    for (double r : sorted) q.push_back(std::llround(r / 1e-12));
    return {std::move(q), k};
  }

  ExpPolyMix build_sorted(const std::vector<double>& sorted, int k) {
    const double total = compensated_sum(sorted);
    if (k == 1) return ExpPolyMix::exponential(total);
    Key key = make_key(sorted, k);
    if (auto it = memo_.find(key); it != memo_.end()) return it->second;
    if (memo_.size() >= max_memo_) throw LimitExceeded("Lemma2Builder: memo table cap reached");

    std::vector<MixtureComponent> parts;
    std::size_t i = 0;
    while (i < sorted.size()) {
      std::size_t j = i;
      while (j < sorted.size() && sorted[j] == sorted[i]) ++j;
      std::vector<double> rest;
      rest.reserve(sorted.size() - 1);
      rest.insert(rest.end(), sorted.begin(), sorted.begin() + static_cast<std::ptrdiff_t>(i));
      rest.insert(rest.end(), sorted.begin() + static_cast<std::ptrdiff_t>(i) + 1, sorted.end());
      const double weight = static_cast<double>(j - i) * sorted[i] / total;
      parts.push_back({weight, build_sorted(rest, k - 1)});
      i = j;
    }
    // Renormalize: the weights sum to 1 up to rounding of `total`.
    CompensatedSum wsum;
    for (const auto& p : parts) wsum += p.weight;
    for (auto& p : parts) p.weight /= wsum.value();

    ExpPolyMix result = convolve(ExpPolyMix::exponential(total), mix(parts));
    memo_.emplace(std::move(key), result);
    return result;
  }

  std::size_t max_memo_;
  std::map<Key, ExpPolyMix> memo_;
};

/// Lemma-2 route; k = 1 is the base case expo(total).
inline ExpPolyMix build_order_stat_lemma2(const OrderStatSpec& spec) {
  spec.validate();
  if (const auto* h = std::get_if<HomogeneousRate>(&spec.source)) {
    return detail::direct_homogeneous(h->value(), spec.n, spec.k);
  }
  const auto& rates = std::get<RateVector>(spec.source);
  if (rates.all_equal()) return detail::direct_homogeneous(rates[0], spec.n, spec.k);
  if (spec.n > kMaxSymbolicRates) {
    throw LimitExceeded("build_order_stat_lemma2: n exceeds " +
                        std::to_string(kMaxSymbolicRates));
  }
  Lemma2Builder builder;
  return builder.build(rates.vector(), spec.k);
}

namespace detail {

// dist[j] = P(exactly j of the components have failed), p_i = 1 - exp(-rate_i x).
inline std::vector<double> failure_count_distribution(const std::vector<double>& rates,
                                                      double x) {
  std::vector<double> dist(rates.size() + 1, 0.0);
  dist[0] = 1.0;
  for (std::size_t i = 0; i < rates.size(); ++i) {
    const double p = -std::expm1(-rates[i] * x);
    const double q = std::exp(-rates[i] * x);
    for (std::size_t j = i + 1; j > 0; --j) dist[j] = dist[j] * q + dist[j - 1] * p;
    dist[0] *= q;
  }
  return dist;
}

}  // namespace detail

/// Pointwise distribution of an order statistic via the failure-count
/// (Poisson-binomial) recursion. Every operation adds nonnegative numbers,
/// so both tails keep full relative accuracy; valid up to n = 64.
class OrderStatistic {
 public:
  explicit OrderStatistic(const OrderStatSpec& spec)
      : rates_(spec.component_rates()), k_(spec.k) {
    spec.validate();
    if (spec.n > kMaxPointwiseRates) {
      throw LimitExceeded("OrderStatistic: n exceeds " + std::to_string(kMaxPointwiseRates));
    }
  }

  OrderStatistic(std::vector<double> rates, int k)
      : OrderStatistic(OrderStatSpec::heterogeneous(RateVector(std::move(rates)), k)) {}

  int k() const { return k_; }
  int n() const { return static_cast<int>(rates_.size()); }
  const std::vector<double>& rates() const { return rates_; }

  TailPair evaluate(double x) const {
    if (x <= 0.0) return {0.0, 1.0, 0.0, 0.0};
    const auto dist = detail::failure_count_distribution(rates_, x);
    CompensatedSum lower;
    CompensatedSum upper;
    for (std::size_t j = 0; j < dist.size(); ++j) {
      if (static_cast<int>(j) >= k_) {
        lower += dist[j];
      } else {
        upper += dist[j];
      }
    }
    const double rel = 4.0 * kEps * static_cast<double>(rates_.size() + 2);
    return {lower.value(), upper.value(), rel * lower.value(), rel * upper.value()};
  }

  double cdf(double x) const { return evaluate(x).lower; }
  double sf(double x) const { return evaluate(x).upper; }

  /// f(x) = sum_i rate_i exp(-rate_i x) P(exactly k-1 of the others failed).
  double pdf(double x) const {
    const std::size_t n = rates_.size();
    if (x < 0.0) return 0.0;
    if (x == 0.0) {
      if (k_ != 1) return 0.0;
      return compensated_sum(rates_);
    }
    // prefix[i] covers components [0, i), suffix[i] covers [i, n)
    std::vector<std::vector<double>> prefix(n + 1), suffix(n + 1);
    prefix[0] = {1.0};
    for (std::size_t i = 0; i < n; ++i) prefix[i + 1] = extend(prefix[i], rates_[i], x);
    suffix[n] = {1.0};
    for (std::size_t i = n; i-- > 0;) suffix[i] = extend(suffix[i + 1], rates_[i], x);
    const auto target = static_cast<std::size_t>(k_ - 1);
    CompensatedSum acc;
    for (std::size_t i = 0; i < n; ++i) {
      double others = 0.0;
      const auto& pre = prefix[i];
      const auto& suf = suffix[i + 1];
      for (std::size_t a = 0; a < pre.size() && a <= target; ++a) {
        const std::size_t b = target - a;
        if (b < suf.size()) others += pre[a] * suf[b];
      }
      acc += rates_[i] * std::exp(-rates_[i] * x) * others;
    }
    return acc.value();
  }

  double hazard(double x) const { return hetexp::hazard(*this, x); }
  double quantile(double u) const { return hetexp::quantile(*this, u); }

  double scale_hint() const {
    return 1.0 / *std::min_element(rates_.begin(), rates_.end());
  }

 private:
  static std::vector<double> extend(const std::vector<double>& dist, double rate, double x) {
    const double p = -std::expm1(-rate * x);
    const double q = std::exp(-rate * x);
    std::vector<double> out(dist.size() + 1, 0.0);
    for (std::size_t j = 0; j < dist.size(); ++j) {
      out[j] += dist[j] * q;
      out[j + 1] += dist[j] * p;
    }
    return out;
  }

  std::vector<double> rates_;
  int k_;
};

/// P(X_{k:n} <= x) by the failure-count recursion, without cancellation.
inline double eval_cdf_poisson_binomial(const OrderStatSpec& spec, double x) {
  if (x < 0.0) throw InvalidArgument("eval_cdf_poisson_binomial: x must be >= 0");
  return OrderStatistic(spec).cdf(x);
}

/// Pointwise spacing distribution: a positive mixture of order statistics
/// of the samples left after removing the first m failures.
class SpacingDistribution {
 public:
  struct Component {
    double weight;
    std::uint32_t removed;  // bitmask of the first m failures
    OrderStatistic dist;
  };

  explicit SpacingDistribution(const SpacingSpec& spec) {
    spec.validate();
    const int order = spec.k - spec.m;
    const int remaining = spec.n - spec.m;
    if (const auto* h = std::get_if<HomogeneousRate>(&spec.source)) {
      components_.push_back(
          {1.0, 0u, OrderStatistic(OrderStatSpec::homogeneous(h->value(), remaining, order))});
      return;
    }
    const auto& rates = std::get<RateVector>(spec.source);
    CompensatedSum wsum;
    for (const auto& sw : ordering_weights(rates, spec.m)) {
      if (sw.weight <= 0.0) continue;
      components_.push_back(
          {sw.weight, sw.mask, OrderStatistic(rates_without(rates, sw.mask), order)});
      wsum += sw.weight;
    }
    weight_sum_ = wsum.value();
  }

  const std::vector<Component>& components() const { return components_; }
  double weight_sum() const { return weight_sum_; }

  TailPair evaluate(double x) const {
    CompensatedSum lo, up, lo_err, up_err;
    for (const auto& c : components_) {
      const TailPair t = c.dist.evaluate(x);
      lo += c.weight * t.lower;
      up += c.weight * t.upper;
      lo_err += c.weight * t.lower_err;
      up_err += c.weight * t.upper_err;
    }
    const double rel = 4.0 * kEps * static_cast<double>(components_.size());
    return {lo.value(), up.value(), lo_err.value() + rel * lo.value(),
            up_err.value() + rel * up.value()};
  }

  double cdf(double x) const { return evaluate(x).lower; }
  double sf(double x) const { return evaluate(x).upper; }

  double pdf(double x) const {
    CompensatedSum acc;
    for (const auto& c : components_) acc += c.weight * c.dist.pdf(x);
    return acc.value();
  }

  double quantile(double u) const { return hetexp::quantile(*this, u); }

  double scale_hint() const {
    double h = 0.0;
    for (const auto& c : components_) h = std::max(h, c.dist.scale_hint());
    return h;
  }

 private:
  std::vector<Component> components_;
  double weight_sum_ = 1.0;
};

/// Exact symbolic spacing distribution, mixture over the first-m-failure sets.
inline ExpPolyMix build_spacing(const SpacingSpec& spec) {
  spec.validate();
  const int order = spec.k - spec.m;
  const int remaining = spec.n - spec.m;
  if (const auto* h = std::get_if<HomogeneousRate>(&spec.source)) {
    return detail::direct_homogeneous(h->value(), remaining, order);
  }
  const auto& rates = std::get<RateVector>(spec.source);
  if (rates.all_equal()) return detail::direct_homogeneous(rates[0], remaining, order);
  if (spec.n > kMaxSymbolicRates) {
    throw LimitExceeded("build_spacing: n exceeds " + std::to_string(kMaxSymbolicRates));
  }
  std::vector<MixtureComponent> parts;
  CompensatedSum wsum;
  for (const auto& sw : ordering_weights(rates, spec.m)) {
    if (sw.weight <= 0.0) continue;
    const RateVector rest(rates_without(rates, sw.mask));
    parts.push_back({sw.weight, build_order_stat_direct(OrderStatSpec::heterogeneous(rest, order))});
    wsum += sw.weight;
  }
  for (auto& p : parts) p.weight /= wsum.value();
  return mix(parts);
}

}  // namespace hetexp
