#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "hetexp/distribution.hpp"
#include "hetexp/hypoexponential.hpp"
#include "hetexp/numeric.hpp"

namespace hetexp {

enum class Relation { st, hr, disp, star, lorenz };

inline const char* to_string(Relation r) {
  switch (r) {
    case Relation::st: return "st";
    case Relation::hr: return "hr";
    case Relation::disp: return "disp";
    case Relation::star: return "star";
    case Relation::lorenz: return "lorenz";
  }
  return "?";
}

inline std::optional<Relation> parse_relation(const std::string& s) {
  if (s == "st") return Relation::st;
  if (s == "hr") return Relation::hr;
  if (s == "disp") return Relation::disp;
  if (s == "star") return Relation::star;
  if (s == "lorenz") return Relation::lorenz;
  return std::nullopt;
}

/// Worst point of a scan. For pointwise relations x_prev == x; for
/// monotonicity relations the secant runs from x_prev to x and lhs / rhs
/// are the monitored quantity at the two ends (lhs <= rhs is required).
struct Witness {
  double x_prev = 0.0;
  double x = 0.0;
  double lhs = 0.0;
  double rhs = 0.0;
};

/// Outcome of `lhs <=_relation rhs`. `margin` is the worst signed slack in
/// relative units (absolute for lorenz); differences inside the evaluators'
/// error bounds count as zero.
struct OrderVerdict {
  Relation relation = Relation::st;
  bool holds = true;
  std::optional<Witness> witness;
  double margin = 0.0;
  double tolerance = 0.0;
  std::size_t points = 0;
  std::size_t skipped = 0;
  std::optional<double> truncated_at;
  std::optional<double> cv_lhs;
  std::optional<double> cv_rhs;
};

enum class CrossingDirection { from_below, from_above, none };

inline const char* to_string(CrossingDirection d) {
  switch (d) {
    case CrossingDirection::from_below: return "from_below";
    case CrossingDirection::from_above: return "from_above";
    case CrossingDirection::none: return "none";
  }
  return "?";
}

struct CrossingReport {
  int count = 0;
  std::vector<std::pair<double, double>> locations;
  CrossingDirection direction_first = CrossingDirection::none;
};

struct CheckOptions {
  std::size_t base_points = 512;
  std::size_t low_points = 64;
  std::size_t high_points = 64;
  double low_quantile = 1e-5;
  double high_tail = 1e-9;
  double low_span = 1e-8;   // low points reach down to low_span * q(low_quantile)
  double high_span = 3.0;   // high points reach up to high_span * q(1 - high_tail)
  double st_tol = 1e-8;
  double hr_tol = 1e-9;
  double disp_tol = 1e-8;
  double star_tol = 1e-8;
  double lorenz_tol = 1e-7;
  double hr_truncation = 1e-250;
  double reliable_rel_err = 1e-6;
  std::size_t lorenz_panels = 256;  // x 8 Gauss-Legendre nodes
};

/// Scan abscissae built from the quantiles of `d`: base points logit-spaced
/// in probability between the low quantile and the upper tail, log-spaced
/// points below, and linearly spaced points beyond the upper tail.
template <Distribution D>
std::vector<double> scan_grid(const D& d, const CheckOptions& opt = {}) {
  std::vector<double> xs;
  xs.reserve(opt.base_points + opt.low_points + opt.high_points);
  const double x_lo = invert_tail(d, opt.low_quantile, Tail::lower);
  const double x_hi = invert_tail(d, opt.high_tail, Tail::upper);
  for (std::size_t i = 0; i < opt.low_points; ++i) {
    const double t = static_cast<double>(opt.low_points - i) / static_cast<double>(opt.low_points);
    xs.push_back(x_lo * std::pow(opt.low_span, t));
  }
  const double t0 = std::log(opt.low_quantile / (1.0 - opt.low_quantile));
  const double t1 = std::log((1.0 - opt.high_tail) / opt.high_tail);
  for (std::size_t i = 0; i < opt.base_points; ++i) {
    const double t = t0 + (t1 - t0) * static_cast<double>(i) /
                              static_cast<double>(std::max<std::size_t>(opt.base_points - 1, 1));
    if (t <= 0.0) {
      xs.push_back(invert_tail(d, 1.0 / (1.0 + std::exp(-t)), Tail::lower));
    } else {
      xs.push_back(invert_tail(d, 1.0 / (1.0 + std::exp(t)), Tail::upper));
    }
  }
  for (std::size_t i = 1; i <= opt.high_points; ++i) {
    xs.push_back(x_hi * (1.0 + (opt.high_span - 1.0) * static_cast<double>(i) /
                                   static_cast<double>(opt.high_points)));
  }
  std::sort(xs.begin(), xs.end());
  xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
  return xs;
}

namespace detail {

inline std::vector<double> merge_grids(std::vector<double> a, const std::vector<double>& b) {
  a.insert(a.end(), b.begin(), b.end());
  std::sort(a.begin(), a.end());
  a.erase(std::unique(a.begin(), a.end()), a.end());
  return a;
}

// Slack of `diff >= 0` in units of `scale`; negative values within `noise`
// are not counted as violations.
inline double relative_slack(double diff, double noise, double scale) {
  if (diff >= 0.0) return scale > 0.0 ? diff / scale : 0.0;
  if (diff + noise >= 0.0 || scale <= 0.0) return 0.0;
  return (diff + noise) / scale;
}

class VerdictBuilder {
 public:
  VerdictBuilder(Relation r, double tol) {
    v_.relation = r;
    v_.tolerance = tol;
    v_.margin = std::numeric_limits<double>::infinity();
  }

  void observe(double slack, const Witness& w) {
    ++v_.points;
    if (slack < v_.margin) {
      v_.margin = slack;
      worst_ = w;
    }
  }

  void skip() { ++v_.skipped; }
  OrderVerdict& raw() { return v_; }

  OrderVerdict finish() {
    if (!std::isfinite(v_.margin)) v_.margin = 0.0;
    v_.holds = v_.margin >= -v_.tolerance;
    if (!v_.holds || v_.margin < 0.0) v_.witness = worst_;
    return v_;
  }

 private:
  OrderVerdict v_;
  Witness worst_;
};

// Signed F_a - F_b (or S_b - S_a in the upper region) with noise and scale.
struct SignedGap {
  double diff;
  double noise;
  double scale;
  double a_value;
  double b_value;
};

inline SignedGap cdf_gap(const TailPair& a, const TailPair& b) {
  if (std::max(a.lower, b.lower) <= 0.5) {
    return {a.lower - b.lower, a.lower_err + b.lower_err, std::max(a.lower, b.lower), a.lower,
            b.lower};
  }
  return {b.upper - a.upper, a.upper_err + b.upper_err, std::max(a.upper, b.upper), a.lower,
          b.lower};
}

struct QuantilePair {
  bool ok;
  double x;
  double y;
  double y_noise;  // absolute error bound on y
};

// y = G^{-1}(F(x)) using the accurate tail of F at x.
template <Distribution L, Distribution R>
QuantilePair transfer(const L& lhs, const R& rhs, double x, const CheckOptions& opt) {
  const TailPair t = lhs.evaluate(x);
  const bool lower = t.lower <= 0.5;
  const double p = lower ? t.lower : t.upper;
  const double perr = lower ? t.lower_err : t.upper_err;
  if (!(p > 0.0) || !(p < 1.0) || perr > opt.reliable_rel_err * p) return {false, x, 0.0, 0.0};
  const double y = invert_tail(rhs, p, lower ? Tail::lower : Tail::upper);
  const TailPair tr = rhs.evaluate(y);
  const double rerr = lower ? tr.lower_err : tr.upper_err;
  if (rerr > opt.reliable_rel_err * p) return {false, x, 0.0, 0.0};
  const double f = rhs.pdf(y);
  double noise = 1e-13 * y;
  if (f > 0.0) noise += (perr + rerr) / f;
  return {true, x, y, noise};
}

}  // namespace detail

/// lhs <=_st rhs, i.e. F_lhs(x) >= F_rhs(x) for all x.
template <Distribution L, Distribution R>
OrderVerdict check_st(const L& lhs, const R& rhs, const CheckOptions& opt = {}) {
  detail::VerdictBuilder vb(Relation::st, opt.st_tol);
  const auto xs = detail::merge_grids(scan_grid(lhs, opt), scan_grid(rhs, opt));
  for (double x : xs) {
    const auto g = detail::cdf_gap(lhs.evaluate(x), rhs.evaluate(x));
    vb.observe(detail::relative_slack(g.diff, g.noise, g.scale), {x, x, g.b_value, g.a_value});
  }
  return vb.finish();
}

/// lhs <=_hr rhs: S_rhs(x) / S_lhs(x) nondecreasing, checked on log scale by
/// secants starting at x = 0 where the ratio is 1.
template <Distribution L, Distribution R>
OrderVerdict check_hr(const L& lhs, const R& rhs, const CheckOptions& opt = {}) {
  detail::VerdictBuilder vb(Relation::hr, opt.hr_tol);
  const auto xs = detail::merge_grids(scan_grid(lhs, opt), scan_grid(rhs, opt));
  double prev_x = 0.0, prev_h = 0.0, prev_err = 0.0;
  for (double x : xs) {
    const TailPair a = lhs.evaluate(x);
    const TailPair b = rhs.evaluate(x);
    if (a.upper < opt.hr_truncation || b.upper < opt.hr_truncation) {
      vb.raw().truncated_at = x;
      break;
    }
    const double h = log_survival(b) - log_survival(a);
    const double err = log_survival_err(a) + log_survival_err(b);
    const double scale = std::max(std::abs(h), std::abs(prev_h));
    vb.observe(detail::relative_slack(h - prev_h, err + prev_err, scale), {prev_x, x, prev_h, h});
    prev_x = x;
    prev_h = h;
    prev_err = err;
  }
  return vb.finish();
}

/// lhs <=_disp rhs: G^{-1}(u) - F^{-1}(u) nondecreasing in u, with F the
/// lhs distribution; scanned as G^{-1}(F(x)) - x on the lhs grid, anchored
/// at the origin.
template <Distribution L, Distribution R>
OrderVerdict check_disp(const L& lhs, const R& rhs, const CheckOptions& opt = {}) {
  detail::VerdictBuilder vb(Relation::disp, opt.disp_tol);
  double prev_x = 0.0, prev_d = 0.0, prev_noise = 0.0;
  for (double x : scan_grid(lhs, opt)) {
    const auto qp = detail::transfer(lhs, rhs, x, opt);
    if (!qp.ok) {
      vb.skip();
      continue;
    }
    const double d = qp.y - x;
    const double noise = qp.y_noise + 1e-13 * x;
    const double scale = std::max(x, qp.y);
    vb.observe(detail::relative_slack(d - prev_d, noise + prev_noise, scale),
               {prev_x, x, prev_d, d});
    prev_x = x;
    prev_d = d;
    prev_noise = noise;
  }
  return vb.finish();
}

/// lhs <=_* rhs: G^{-1}(F(x)) / x nondecreasing in x > 0.
template <Distribution L, Distribution R>
OrderVerdict check_star(const L& lhs, const R& rhs, const CheckOptions& opt = {}) {
  detail::VerdictBuilder vb(Relation::star, opt.star_tol);
  bool have_prev = false;
  double prev_x = 0.0, prev_r = 0.0, prev_noise = 0.0;
  for (double x : scan_grid(lhs, opt)) {
    const auto qp = detail::transfer(lhs, rhs, x, opt);
    if (!qp.ok) {
      vb.skip();
      continue;
    }
    const double r = qp.y / x;
    const double noise = qp.y_noise / x + 1e-13 * r;
    if (have_prev) {
      const double scale = std::max(r, prev_r);
      vb.observe(detail::relative_slack(r - prev_r, noise + prev_noise, scale),
                 {prev_x, x, prev_r, r});
    }
    have_prev = true;
    prev_x = x;
    prev_r = r;
    prev_noise = noise;
  }
  return vb.finish();
}

namespace detail {

struct LorenzCurve {
  std::vector<double> p;       // panel edges
  std::vector<double> curve;   // normalized integrated quantile at edges
  double mean = 0.0;
  double cv = 0.0;
};

inline std::vector<double> lorenz_edges(std::size_t panels) {
  std::vector<double> edges{0.0};
  const double t0 = std::log(1e-12);
  const double t1 = -t0;
  for (std::size_t i = 0; i < panels; ++i) {
    const double t = t0 + (t1 - t0) * static_cast<double>(i) / static_cast<double>(panels - 1);
    edges.push_back(1.0 / (1.0 + std::exp(-t)));
  }
  return edges;
}

template <Distribution D>
LorenzCurve lorenz_curve(const D& d, const std::vector<double>& edges) {
  static constexpr double kNodes[8] = {-0.9602898564975363, -0.7966664774136267,
                                       -0.5255324099163290, -0.1834346424956498,
                                       0.1834346424956498,  0.5255324099163290,
                                       0.7966664774136267,  0.9602898564975363};
  static constexpr double kWeights[8] = {0.1012285362903763, 0.2223810344533745,
                                         0.3137066458778873, 0.3626837833783620,
                                         0.3626837833783620, 0.3137066458778873,
                                         0.2223810344533745, 0.1012285362903763};
  LorenzCurve lc;
  lc.p = edges;
  lc.curve.assign(edges.size(), 0.0);
  CompensatedSum first;
  CompensatedSum second;
  for (std::size_t i = 0; i + 1 < edges.size(); ++i) {
    const double a = edges[i];
    const double b = edges[i + 1];
    const double half = 0.5 * (b - a);
    const double mid = 0.5 * (a + b);
    for (int j = 0; j < 8; ++j) {
      const double u = mid + half * kNodes[j];
      // 1 - u is formed from the edge distance to keep precision near 1
      const double x = u <= 0.5 ? invert_tail(d, u, Tail::lower)
                                : invert_tail(d, (1.0 - b) + half * (1.0 - kNodes[j]), Tail::upper);
      first += half * kWeights[j] * x;
      second += half * kWeights[j] * x * x;
    }
    lc.curve[i + 1] = first.value();
  }
  lc.mean = first.value();
  for (double& v : lc.curve) v /= lc.mean;
  const double var = std::max(second.value() - lc.mean * lc.mean, 0.0);
  lc.cv = std::sqrt(var) / lc.mean;
  return lc;
}

}  // namespace detail

/// lhs <=_L rhs: the Lorenz curve of lhs lies above that of rhs. Curves are
/// integrated quantile functions (8-point Gauss-Legendre panels, logit-spaced
/// from 1e-12 to 1 - 1e-12). Also reports both coefficients of variation.
template <Distribution L, Distribution R>
OrderVerdict check_lorenz(const L& lhs, const R& rhs, const CheckOptions& opt = {}) {
  detail::VerdictBuilder vb(Relation::lorenz, opt.lorenz_tol);
  const auto edges = detail::lorenz_edges(opt.lorenz_panels);
  const auto a = detail::lorenz_curve(lhs, edges);
  const auto b = detail::lorenz_curve(rhs, edges);
  for (std::size_t i = 1; i + 1 < edges.size(); ++i) {
    const double diff = a.curve[i] - b.curve[i];
    vb.observe(diff, {edges[i], edges[i], b.curve[i], a.curve[i]});
  }
  vb.raw().cv_lhs = a.cv;
  vb.raw().cv_rhs = b.cv;
  return vb.finish();
}

namespace detail {

// -1, 0, +1 for the sign of F(c x) - G(x); 0 when inside the error bounds.
template <Distribution F, Distribution G>
int crossing_sign(const F& f, const G& g, double c, double x) {
  const auto gap = cdf_gap(f.evaluate(c * x), g.evaluate(x));
  if (std::abs(gap.diff) <= gap.noise + 1e-13 * gap.scale) return 0;
  return gap.diff > 0.0 ? 1 : -1;
}

}  // namespace detail

/// Sign changes of F(c x) - G(x) over both distributions' scan grids, each
/// bracket sharpened by bisection.
template <Distribution F, Distribution G>
CrossingReport count_crossings(const F& f, const G& g, double c, const CheckOptions& opt = {}) {
  if (!(c > 0.0)) throw InvalidArgument("count_crossings: c must be positive");
  auto xs = scan_grid(g, opt);
  std::vector<double> fx = scan_grid(f, opt);
  for (double& x : fx) x /= c;
  xs = detail::merge_grids(std::move(xs), fx);

  CrossingReport rep;
  int last_sign = 0;
  double last_x = 0.0;
  for (double x : xs) {
    const int s = detail::crossing_sign(f, g, c, x);
    if (s == 0) continue;
    if (last_sign == 0) {
      rep.direction_first = s < 0 ? CrossingDirection::from_below : CrossingDirection::from_above;
    } else if (s != last_sign) {
      double a = last_x, b = x;
      for (int it = 0; it < 60; ++it) {
        const double mid = 0.5 * (a + b);
        const int sm = detail::crossing_sign(f, g, c, mid);
        if (sm == 0) {
          a = b = mid;
          break;
        }
        if (sm == last_sign) {
          a = mid;
        } else {
          b = mid;
        }
      }
      rep.locations.emplace_back(a, b);
      ++rep.count;
    }
    last_sign = s;
    last_x = x;
  }
  if (rep.count == 0) rep.direction_first = CrossingDirection::none;
  return rep;
}

/// log(eta) weakly submajorized by log(theta): every partial sum of the
/// largest j entries of log(eta) is at most the corresponding sum for theta.
inline bool check_weak_log_submajorization(std::span<const double> eta,
                                           std::span<const double> theta) {
  if (eta.size() != theta.size()) throw InvalidArgument("weak submajorization: length mismatch");
  std::vector<double> a, b;
  for (std::size_t i = 0; i < eta.size(); ++i) {
    if (!(eta[i] > 0.0) || !(theta[i] > 0.0)) {
      throw InvalidArgument("weak submajorization: entries must be positive");
    }
    a.push_back(std::log(eta[i]));
    b.push_back(std::log(theta[i]));
  }
  std::sort(a.begin(), a.end(), std::greater<>());
  std::sort(b.begin(), b.end(), std::greater<>());
  double sa = 0.0, sb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    sa += a[i];
    sb += b[i];
    if (sa > sb + 1e-12 * (1.0 + std::abs(sb))) return false;
  }
  return true;
}

/// Both weight vectors ascending; true iff some split 2 <= k <= n has
/// theta_i < eta_i below k and theta_i > eta_i from k on, and
/// prod eta > prod theta.
inline bool check_single_crossing_config(std::span<const double> theta,
                                         std::span<const double> eta) {
  if (theta.size() != eta.size()) throw InvalidArgument("single crossing: length mismatch");
  if (theta.size() < 2) return false;
  for (std::size_t i = 0; i < theta.size(); ++i) {
    if (!(theta[i] > 0.0) || !(eta[i] > 0.0)) {
      throw InvalidArgument("single crossing: weights must be positive");
    }
    if (i > 0 && (theta[i] < theta[i - 1] || eta[i] < eta[i - 1])) {
      throw InvalidArgument("single crossing: weights must be sorted ascending");
    }
  }
  double log_eta = 0.0, log_theta = 0.0;
  for (std::size_t i = 0; i < theta.size(); ++i) {
    log_eta += std::log(eta[i]);
    log_theta += std::log(theta[i]);
  }
  if (!(log_eta > log_theta)) return false;
  // (a) forces the split at the first index where theta stops being smaller.
  std::size_t k = 0;
  while (k < theta.size() && theta[k] < eta[k]) ++k;
  if (k < 1 || k >= theta.size()) return false;
  for (std::size_t i = k; i < theta.size(); ++i) {
    if (!(theta[i] > eta[i])) return false;
  }
  return true;
}

/// Counts crossings of F_eta and F_theta, the distributions of
/// sum_i eta_i Z_i and sum_i theta_i Z_i with Z_i iid standard exponential.
/// Under the single-crossing configuration the answer is one crossing with
/// F_eta below first.
inline CrossingReport verify_single_crossing(std::span<const double> theta,
                                             std::span<const double> eta,
                                             const CheckOptions& opt = {}) {
  const auto f_eta = Hypoexponential::from_weights(eta);
  const auto f_theta = Hypoexponential::from_weights(theta);
  return count_crossings(f_eta, f_theta, 1.0, opt);
}

}  // namespace hetexp
