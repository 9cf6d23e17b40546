#pragma once

#include <cmath>
#include <concepts>
#include <limits>
#include <string>

#include "hetexp/numeric.hpp"

namespace hetexp {

/// Both tails of a distribution function at one point, each carrying an
/// absolute error bound. `lower` is F(x) and `upper` is S(x) = 1 - F(x);
/// evaluators compute each tail directly so that small values keep their
/// relative accuracy.
struct TailPair {
  double lower = 0.0;
  double upper = 1.0;
  double lower_err = 0.0;
  double upper_err = 0.0;
};

/// A continuous lifetime distribution on (0, inf).
template <class D>
concept Distribution = requires(const D& d, double x) {
  { d.evaluate(x) } -> std::same_as<TailPair>;
  { d.pdf(x) } -> std::convertible_to<double>;
  { d.scale_hint() } -> std::convertible_to<double>;
};

enum class Tail { lower, upper };

namespace detail {

inline double tail_value(const TailPair& t, Tail tail) {
  return tail == Tail::lower ? t.lower : t.upper;
}

}  // namespace detail

/// Solves F(x) = p (Tail::lower) or S(x) = p (Tail::upper) for x > 0.
///
/// Brackets from the distribution's scale hint, then runs Newton on
/// log F (or log S) against log x, falling back to geometric bisection
/// whenever a step leaves the bracket. Terminates once the relative residual
/// in the probability is below 1e-14 or the bracket collapses to a few ulps.
template <Distribution D>
double invert_tail(const D& d, double p, Tail tail) {
  if (!(p > 0.0 && p < 1.0)) {
    throw InvalidArgument("tail probability must lie in (0, 1), got " + std::to_string(p));
  }
  const double target = std::log(p);
  // g is increasing in x for both tails after the sign flip.
  auto g = [&](double x, double* value) {
    const double v = detail::tail_value(d.evaluate(x), tail);
    *value = v;
    const double lv = v > 0.0 ? std::log(v) : -std::numeric_limits<double>::infinity();
    return tail == Tail::lower ? lv - target : target - lv;
  };

  const double hint = std::max(d.scale_hint(), std::numeric_limits<double>::min());
  const double q_upper = tail == Tail::upper ? p : 1.0 - p;
  double hi = (-std::log(q_upper) + 1.0) * hint;
  double v = 0.0;
  double g_hi = g(hi, &v);
  for (int i = 0; g_hi < 0.0; ++i) {
    if (i > 2000) throw NumericalError("quantile: failed to find upper bracket");
    hi *= 2.0;
    g_hi = g(hi, &v);
  }
  double lo = hi * 0.5;
  double g_lo = g(lo, &v);
  for (int i = 0; g_lo >= 0.0; ++i) {
    if (i > 2200 || lo == 0.0) throw NumericalError("quantile: failed to find lower bracket");
    hi = lo;
    g_hi = g_lo;
    lo *= 0.5;
    g_lo = g(lo, &v);
  }
  if (g_hi == 0.0) return hi;

  double x = std::sqrt(lo * hi);
  for (int iter = 0; iter < 400; ++iter) {
    double value = 0.0;
    const double gx = g(x, &value);
    if (std::abs(gx) <= 1e-14) return x;
    if (gx < 0.0) {
      lo = x;
    } else {
      hi = x;
    }
    if (hi - lo <= 4.0 * kEps * hi) return 0.5 * (lo + hi);

    // d g / d log x = x f(x) / v for both tails.
    double next = std::sqrt(lo * hi);
    const double f = d.pdf(x);
    if (value > 0.0 && f > 0.0 && std::isfinite(gx)) {
      const double slope = x * f / value;
      const double cand = x * std::exp(-gx / slope);
      if (std::isfinite(cand) && cand > lo && cand < hi) next = cand;
    }
    x = next;
  }
  throw NumericalError("quantile: no convergence within iteration cap");
}

/// Inverse of the distribution function, u in (0, 1).
template <Distribution D>
double quantile(const D& d, double u) {
  return u <= 0.5 ? invert_tail(d, u, Tail::lower) : invert_tail(d, 1.0 - u, Tail::upper);
}

/// Inverse of the survival function, q in (0, 1).
template <Distribution D>
double inverse_sf(const D& d, double q) {
  return q <= 0.5 ? invert_tail(d, q, Tail::upper) : invert_tail(d, 1.0 - q, Tail::lower);
}

/// log S(x), computed from whichever tail is the accurate one.
inline double log_survival(const TailPair& t) {
  if (t.lower <= 0.5) return std::log1p(-t.lower);
  return std::log(t.upper);
}

/// Absolute error bound of log_survival(t).
inline double log_survival_err(const TailPair& t) {
  if (t.upper <= 0.0) return std::numeric_limits<double>::infinity();
  return (t.lower <= 0.5 ? t.lower_err : t.upper_err) / t.upper +
         4.0 * kEps * std::abs(log_survival(t));
}

template <Distribution D>
double hazard(const D& d, double x) {
  const TailPair t = d.evaluate(x);
  if (t.upper < 1e-300) throw NumericalError("hazard: survival function underflow");
  return d.pdf(x) / t.upper;
}

}  // namespace hetexp
