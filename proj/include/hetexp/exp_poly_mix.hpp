#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "hetexp/distribution.hpp"
#include "hetexp/numeric.hpp"

namespace hetexp {

/// Positive, finite exponential rates of a heterogeneous sample.
class RateVector {
 public:
  explicit RateVector(std::vector<double> rates) : rates_(std::move(rates)) {
    if (rates_.empty()) throw InvalidArgument("RateVector: at least one rate required");
    for (double r : rates_) {
      if (!(r > 0.0) || !std::isfinite(r)) {
        throw InvalidArgument("RateVector: rates must be positive and finite");
      }
    }
  }

  std::size_t size() const { return rates_.size(); }
  int n() const { return static_cast<int>(rates_.size()); }
  double operator[](std::size_t i) const { return rates_[i]; }
  std::span<const double> values() const { return rates_; }
  const std::vector<double>& vector() const { return rates_; }

  double total() const { return compensated_sum(rates_); }

  std::vector<double> sorted() const {
    std::vector<double> s = rates_;
    std::sort(s.begin(), s.end());
    return s;
  }

  RateVector scaled(double c) const {
    std::vector<double> s = rates_;
    for (double& r : s) r *= c;
    return RateVector(std::move(s));
  }

  /// Rates with relative spread at most `rel_tol` count as equal.
  bool all_equal(double rel_tol = 1e-9) const {
    const auto [lo, hi] = std::minmax_element(rates_.begin(), rates_.end());
    return rates_tied(*lo, *hi, rel_tol);
  }

 private:
  std::vector<double> rates_;
};

/// Common rate of a homogeneous exponential sample.
class HomogeneousRate {
 public:
  explicit HomogeneousRate(double gamma) : gamma_(gamma) {
    if (!(gamma > 0.0) || !std::isfinite(gamma)) {
      throw InvalidArgument("HomogeneousRate: gamma must be positive and finite");
    }
  }
  double value() const { return gamma_; }

 private:
  double gamma_;
};

/// One summand p(x) exp(-rate x) of a survival function.
struct ExpPolyTerm {
  double rate = 1.0;
  std::vector<double> coeffs;  // coeffs[a] multiplies x^a
};

struct ExpPolyLimits {
  std::size_t max_terms = 4096;
  std::size_t max_degree = 64;
};

/// Rates closer than this (relative) are merged into one polynomial term.
inline constexpr double kTieTolerance = 1e-9;

/// Distribution whose survival function is S(x) = sum_j p_j(x) exp(-mu_j x)
/// for x >= 0. Canonical form: rates strictly increasing and pairwise
/// further apart than kTieTolerance, no identically zero term, S(0) = 1.
/// Values are immutable.
class ExpPolyMix {
 public:
  /// Validates and canonicalizes. Throws InvalidArgument if a rate is not
  /// positive or S(0) differs from 1 by more than 1e-9.
  static ExpPolyMix from_terms(std::vector<ExpPolyTerm> terms, const ExpPolyLimits& limits = {}) {
    for (const auto& t : terms) {
      if (!(t.rate > 0.0) || !std::isfinite(t.rate)) {
        throw InvalidArgument("ExpPolyMix: term rates must be positive and finite");
      }
      for (double c : t.coeffs) {
        if (!std::isfinite(c)) throw NumericalError("ExpPolyMix: non-finite coefficient");
      }
    }
    std::vector<ExpPolyTerm> canon = canonicalize(std::move(terms));
    if (canon.size() > limits.max_terms) {
      throw LimitExceeded("ExpPolyMix: term count " + std::to_string(canon.size()) +
                          " exceeds cap " + std::to_string(limits.max_terms));
    }
    CompensatedSum s0;
    for (const auto& t : canon) {
      if (t.coeffs.size() > limits.max_degree + 1) {
        throw LimitExceeded("ExpPolyMix: polynomial degree exceeds cap " +
                            std::to_string(limits.max_degree));
      }
      s0 += t.coeffs.empty() ? 0.0 : t.coeffs[0];
    }
    const double residual = 1.0 - s0.value();
    if (std::abs(residual) > 1e-9) {
      throw InvalidArgument("ExpPolyMix: survival function must equal 1 at the origin (S(0) = " +
                            std::to_string(s0.value()) + ")");
    }
    // Absorb the rounding residual into the largest constant coefficient.
    if (residual != 0.0 && !canon.empty()) {
      auto it = std::max_element(canon.begin(), canon.end(), [](const auto& a, const auto& b) {
        return std::abs(a.coeffs[0]) < std::abs(b.coeffs[0]);
      });
      it->coeffs[0] += residual;
    }
    return ExpPolyMix(std::move(canon));
  }

  static ExpPolyMix exponential(double rate) { return from_terms({{rate, {1.0}}}); }

  /// Gamma with integer shape: S(x) = exp(-rate x) sum_{a < shape} (rate x)^a / a!.
  static ExpPolyMix erlang(int shape, double rate) {
    if (shape < 1) throw InvalidArgument("erlang: shape must be >= 1");
    std::vector<double> c(static_cast<std::size_t>(shape));
    double v = 1.0;
    for (int a = 0; a < shape; ++a) {
      c[static_cast<std::size_t>(a)] = v;
      v *= rate / (a + 1);
    }
    return from_terms({{rate, std::move(c)}});
  }

  const std::vector<ExpPolyTerm>& terms() const { return terms_; }
  const std::vector<ExpPolyTerm>& density_terms() const { return density_; }

  std::size_t degree() const {
    std::size_t d = 0;
    for (const auto& t : terms_) d = std::max(d, t.coeffs.size() - 1);
    return d;
  }

  TailPair evaluate(double x) const {
    if (x <= 0.0) return {0.0, 1.0, 0.0, 0.0};
    CompensatedSum surv;
    CompensatedSum cdf;  // -sum p(x) expm1(-mu x) - sum (p(x) - p(0))
    double surv_mag = 0.0;
    double cdf_mag = 0.0;
    for (const auto& t : terms_) {
      double pv = 0.0;
      double pabs = 0.0;
      for (std::size_t a = t.coeffs.size(); a-- > 0;) {
        pv = pv * x + t.coeffs[a];
        pabs = pabs * x + std::abs(t.coeffs[a]);
      }
      const double e = std::exp(-t.rate * x);
      const double em1 = std::expm1(-t.rate * x);
      surv += pv * e;
      cdf += -pv * em1;
      cdf += -(pv - t.coeffs[0]);
      surv_mag += pabs * e;
      cdf_mag += pabs * std::abs(em1) + (pabs - std::abs(t.coeffs[0]));
    }
    const double err_scale = 64.0 * kEps * static_cast<double>(terms_.size() + 1);
    TailPair out;
    out.upper = surv.value();
    out.lower = out.upper >= 0.5 ? cdf.value() : 1.0 - out.upper;
    out.upper_err = err_scale * surv_mag + kEps * std::abs(out.upper);
    out.lower_err = out.upper >= 0.5 ? err_scale * cdf_mag + kEps * std::abs(out.lower)
                                     : out.upper_err + kEps;
    out.lower = clamp_probability(out.lower);
    out.upper = clamp_probability(out.upper);
    return out;
  }

  /// F(x). Clamped into [0, 1] only within 1e-12 of the boundary.
  double cdf(double x) const { return evaluate(x).lower; }
  double sf(double x) const { return evaluate(x).upper; }

  double pdf(double x) const {
    if (x < 0.0) return 0.0;
    CompensatedSum acc;
    double mag = 0.0;
    for (const auto& t : density_) {
      double pv = 0.0;
      double pabs = 0.0;
      for (std::size_t a = t.coeffs.size(); a-- > 0;) {
        pv = pv * x + t.coeffs[a];
        pabs = pabs * x + std::abs(t.coeffs[a]);
      }
      const double e = std::exp(-t.rate * x);
      acc += pv * e;
      mag += pabs * e;
    }
    const double v = acc.value();
    if (v < 0.0) {
      if (v < -1e-9 - 64.0 * kEps * mag) {
        throw NumericalError("ExpPolyMix: negative density " + std::to_string(v));
      }
      return 0.0;
    }
    return v;
  }

  double hazard(double x) const { return hetexp::hazard(*this, x); }
  double quantile(double u) const { return hetexp::quantile(*this, u); }

  /// E[X^order] = order * int x^(order-1) S(x) dx, closed form per term.
  double moment(int order) const {
    if (order < 1) throw InvalidArgument("moment: order must be >= 1");
    CompensatedSum acc;
    for (const auto& t : terms_) {
      for (std::size_t a = 0; a < t.coeffs.size(); ++a) {
        const int p = static_cast<int>(a) + order - 1;
        acc += t.coeffs[a] * factorial(p) / std::pow(t.rate, p + 1);
      }
    }
    return order * acc.value();
  }

  double mean() const { return moment(1); }

  double variance() const {
    const double m = mean();
    const double v = moment(2) - m * m;
    if (v < -1e-10 * std::max(1.0, m * m)) {
      throw NumericalError("ExpPolyMix: negative variance, cancellation failure");
    }
    return std::max(v, 0.0);
  }

  double cv() const { return std::sqrt(variance()) / mean(); }

  /// Largest per-term mean (deg + 1) / mu; seeds quantile brackets.
  double scale_hint() const {
    double h = 0.0;
    for (const auto& t : terms_) {
      h = std::max(h, static_cast<double>(t.coeffs.size()) / t.rate);
    }
    return h;
  }

  /// Merge rates within kTieTolerance, sort ascending, trim zeros.
  static std::vector<ExpPolyTerm> canonicalize(std::vector<ExpPolyTerm> raw) {
    std::sort(raw.begin(), raw.end(),
              [](const ExpPolyTerm& a, const ExpPolyTerm& b) { return a.rate < b.rate; });
    std::vector<ExpPolyTerm> out;
    std::size_t i = 0;
    while (i < raw.size()) {
      const double rate = raw[i].rate;
      std::vector<CompensatedSum> acc;
      std::size_t j = i;
      for (; j < raw.size() && rates_tied(raw[j].rate, rate, kTieTolerance); ++j) {
        if (acc.size() < raw[j].coeffs.size()) acc.resize(raw[j].coeffs.size());
        for (std::size_t a = 0; a < raw[j].coeffs.size(); ++a) acc[a] += raw[j].coeffs[a];
      }
      ExpPolyTerm merged{rate, {}};
      merged.coeffs.reserve(acc.size());
      for (const auto& c : acc) merged.coeffs.push_back(c.value());
      while (!merged.coeffs.empty() && merged.coeffs.back() == 0.0) merged.coeffs.pop_back();
      if (!merged.coeffs.empty()) out.push_back(std::move(merged));
      i = j;
    }
    return out;
  }

 private:
  explicit ExpPolyMix(std::vector<ExpPolyTerm> terms) : terms_(std::move(terms)) {
    density_.reserve(terms_.size());
    // f = -S' : (mu p - p') exp(-mu x)
    for (const auto& t : terms_) {
      ExpPolyTerm d{t.rate, std::vector<double>(t.coeffs.size(), 0.0)};
      for (std::size_t a = 0; a < t.coeffs.size(); ++a) {
        d.coeffs[a] += t.rate * t.coeffs[a];
        if (a > 0) d.coeffs[a - 1] -= static_cast<double>(a) * t.coeffs[a];
      }
      density_.push_back(std::move(d));
    }
  }

  static double clamp_probability(double v) {
    if (v >= 0.0 && v <= 1.0) return v;
    if (v < 0.0 && v >= -1e-12) return 0.0;
    if (v > 1.0 && v <= 1.0 + 1e-12) return 1.0;
    throw NumericalError("ExpPolyMix: probability " + std::to_string(v) +
                         " outside [0, 1] beyond clamping slack");
  }

  std::vector<ExpPolyTerm> terms_;
  std::vector<ExpPolyTerm> density_;
};

namespace detail {

// Adds c * int_0^x t^a e^{-alpha t} (x - t)^b e^{-beta (x - t)} dt to `out`,
// using the partial fraction expansion of a! b! / ((s+alpha)^(a+1) (s+beta)^(b+1)).
inline void add_convolution_kernel(std::vector<ExpPolyTerm>& out, double c, int a, double alpha,
                                   int b, double beta) {
  const double f = c * factorial(a) * factorial(b);
  if (rates_tied(alpha, beta, kTieTolerance)) {
    std::vector<double> coeffs(static_cast<std::size_t>(a + b + 2), 0.0);
    coeffs.back() = f / factorial(a + b + 1);
    out.push_back({alpha, std::move(coeffs)});
    return;
  }
  const int A = a + 1;
  const int B = b + 1;
  for (int i = 1; i <= A; ++i) {
    const double sign = ((A - i) % 2 == 0) ? 1.0 : -1.0;
    const double coef =
        sign * binomial(A + B - i - 1, B - 1) / std::pow(beta - alpha, A + B - i);
    std::vector<double> coeffs(static_cast<std::size_t>(i), 0.0);
    coeffs.back() = f * coef / factorial(i - 1);
    out.push_back({alpha, std::move(coeffs)});
  }
  for (int j = 1; j <= B; ++j) {
    const double sign = ((B - j) % 2 == 0) ? 1.0 : -1.0;
    const double coef =
        sign * binomial(A + B - j - 1, A - 1) / std::pow(alpha - beta, A + B - j);
    std::vector<double> coeffs(static_cast<std::size_t>(j), 0.0);
    coeffs.back() = f * coef / factorial(j - 1);
    out.push_back({beta, std::move(coeffs)});
  }
}

}  // namespace detail

/// Distribution of the sum of independent draws from `a` and `b`:
/// S_{a+b}(x) = S_a(x) + int_0^x f_a(t) S_b(x - t) dt, term by term.
inline ExpPolyMix convolve(const ExpPolyMix& a, const ExpPolyMix& b,
                           const ExpPolyLimits& limits = {}) {
  std::vector<ExpPolyTerm> raw = a.terms();
  for (const auto& fa : a.density_terms()) {
    for (const auto& sb : b.terms()) {
      for (std::size_t i = 0; i < fa.coeffs.size(); ++i) {
        if (fa.coeffs[i] == 0.0) continue;
        for (std::size_t j = 0; j < sb.coeffs.size(); ++j) {
          if (sb.coeffs[j] == 0.0) continue;
          detail::add_convolution_kernel(raw, fa.coeffs[i] * sb.coeffs[j], static_cast<int>(i),
                                         fa.rate, static_cast<int>(j), sb.rate);
        }
      }
    }
    if (raw.size() > 64 * limits.max_terms) {
      throw LimitExceeded("convolve: intermediate term count exceeds cap");
    }
  }
  return ExpPolyMix::from_terms(std::move(raw), limits);
}

/// Hypoexponential: sum of independent exponentials with the given rates.
inline ExpPolyMix hypoexponential(std::span<const double> rates, const ExpPolyLimits& limits = {}) {
  if (rates.empty()) throw InvalidArgument("hypoexponential: no rates");
  // Convolve in ascending order so each step adds a single new rate.
  std::vector<double> sorted(rates.begin(), rates.end());
  std::sort(sorted.begin(), sorted.end());
  ExpPolyMix acc = ExpPolyMix::exponential(sorted.front());
  for (std::size_t i = 1; i < sorted.size(); ++i) {
    acc = convolve(ExpPolyMix::exponential(sorted[i]), acc, limits);
  }
  return acc;
}

struct MixtureComponent {
  double weight;
  ExpPolyMix dist;
};

/// Finite mixture; weights must be positive and sum to 1 within 1e-12.
inline ExpPolyMix mix(std::span<const MixtureComponent> components,
                      const ExpPolyLimits& limits = {}) {
  if (components.empty()) throw InvalidArgument("mix: no components");
  CompensatedSum wsum;
  std::vector<ExpPolyTerm> raw;
  for (const auto& c : components) {
    if (!(c.weight > 0.0)) throw InvalidArgument("mix: weights must be positive");
    wsum += c.weight;
    for (const auto& t : c.dist.terms()) {
      ExpPolyTerm w{t.rate, t.coeffs};
      for (double& v : w.coeffs) v *= c.weight;
      raw.push_back(std::move(w));
    }
  }
  if (std::abs(wsum.value() - 1.0) > 1e-12) {
    throw InvalidArgument("mix: weights sum to " + std::to_string(wsum.value()) + ", expected 1");
  }
  return ExpPolyMix::from_terms(std::move(raw), limits);
}

/// Distribution of c X.
inline ExpPolyMix scale(const ExpPolyMix& d, double c) {
  if (!(c > 0.0) || !std::isfinite(c)) throw InvalidArgument("scale: factor must be positive");
  std::vector<ExpPolyTerm> out;
  out.reserve(d.terms().size());
  for (const auto& t : d.terms()) {
    ExpPolyTerm s{t.rate / c, t.coeffs};
    double f = 1.0;
    for (double& v : s.coeffs) {
      v /= f;
      f *= c;
    }
    out.push_back(std::move(s));
  }
  return ExpPolyMix::from_terms(std::move(out));
}

/// Term-set comparison: rates matched within kTieTolerance, missing terms
/// read as zero, coefficients compared with absolute tolerance `tol`.
inline bool approx_equal(const ExpPolyMix& a, const ExpPolyMix& b, double tol) {
  std::vector<ExpPolyTerm> diff = a.terms();
  for (const auto& t : b.terms()) {
    ExpPolyTerm neg{t.rate, t.coeffs};
    for (double& v : neg.coeffs) v = -v;
    diff.push_back(std::move(neg));
  }
  for (const auto& t : ExpPolyMix::canonicalize(std::move(diff))) {
    for (double c : t.coeffs) {
      if (std::abs(c) > tol) return false;
    }
  }
  return true;
}

}  // namespace hetexp
