#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <span>
#include <vector>

#include "hetexp/distribution.hpp"
#include "hetexp/exp_poly_mix.hpp"

namespace hetexp {

/// Sum of independent exponentials, with a pointwise evaluator that keeps
/// relative accuracy in both tails.
///
/// The symbolic survival function is an alternating sum: its lower tail
/// cancels to O(x^n), and nearly tied rates make every value cancel. In
/// those regions the evaluator uses the transition matrix of the phase
/// chain with an absorbing state, exp(Q x), by a Taylor step followed by
/// repeated squaring. Every entry of that matrix is nonnegative, so the
/// squarings never cancel.
class Hypoexponential {
 public:
  explicit Hypoexponential(std::vector<double> rates)
      : rates_(RateVector(std::move(rates)).vector()),
        max_rate_(*std::max_element(rates_.begin(), rates_.end())) {
    CompensatedSum m;
    for (double r : rates_) m += 1.0 / r;
    mean_ = m.value();
    try {
      symbolic_ = hypoexponential(rates_);
      double mag = 0.0;
      for (const auto& t : symbolic_->terms()) {
        for (double c : t.coeffs) mag += std::abs(c);
      }
      symbolic_reliable_ = mag <= kMaxSymbolicMagnitude;
    } catch (const NumericalError&) {
      symbolic_.reset();
    }
  }

  /// Distribution of sum_i w_i Z_i with Z_i iid standard exponential.
  static Hypoexponential from_weights(std::span<const double> weights) {
    std::vector<double> r;
    r.reserve(weights.size());
    for (double w : weights) {
      if (!(w > 0.0)) throw InvalidArgument("Hypoexponential: weights must be positive");
      r.push_back(1.0 / w);
    }
    return Hypoexponential(std::move(r));
  }

  const std::vector<double>& rates() const { return rates_; }

  const ExpPolyMix& symbolic() const {
    if (!symbolic_) throw NumericalError("Hypoexponential: symbolic form unavailable");
    return *symbolic_;
  }

  TailPair evaluate(double x) const {
    if (x <= 0.0) return {0.0, 1.0, 0.0, 0.0};
    if (symbolic_reliable_) {
      try {
        const TailPair sym = symbolic_->evaluate(x);
        if (sym.lower >= kSwitchProbability && sym.lower_err <= kMaxRelErr * sym.lower &&
            sym.upper_err <= kMaxRelErr * sym.upper) {
          return sym;
        }
      } catch (const NumericalError&) {
      }
    }
    const Transient t = transient(x);
    return {t.cdf, t.sf, t.rel_err * t.cdf, t.rel_err * t.sf};
  }

  double cdf(double x) const { return evaluate(x).lower; }
  double sf(double x) const { return evaluate(x).upper; }

  double pdf(double x) const {
    if (x <= 0.0) return rates_.size() == 1 ? rates_[0] : 0.0;
    if (symbolic_reliable_) {
      try {
        const TailPair sym = symbolic_->evaluate(x);
        if (sym.lower >= kSwitchProbability && sym.lower_err <= kMaxRelErr * sym.lower &&
            sym.upper_err <= kMaxRelErr * sym.upper) {
          return symbolic_->pdf(x);
        }
      } catch (const NumericalError&) {
      }
    }
    return transient(x).pdf;
  }

  double scale_hint() const { return mean_; }
  double mean() const { return mean_; }

 private:
  static constexpr double kSwitchProbability = 0.05;
  static constexpr double kMaxRelErr = 1e-12;
  static constexpr double kMaxSymbolicMagnitude = 1e4;

  struct Transient {
    double cdf;
    double sf;
    double pdf;
    double rel_err;
  };

  // Row 0 of exp(Q x) for the phases 0..n-1 plus the absorbing state n.
  Transient transient(double x) const {
    const std::size_t n = rates_.size();
    const std::size_t dim = n + 1;
    int squarings = 0;
    double h = x;
    while (max_rate_ * h > 0.5) {
      h *= 0.5;
      ++squarings;
    }
    // Taylor series of exp(Q h); Q is upper bidiagonal, so is every power
    // upper triangular and the series is accumulated by columns of distance.
    std::vector<double> e(dim * dim, 0.0);
    std::vector<double> term(dim * dim, 0.0);
    std::vector<double> next(dim * dim, 0.0);
    for (std::size_t i = 0; i < dim; ++i) term[i * dim + i] = 1.0;
    e = term;
    const std::size_t terms = n + 30;
    for (std::size_t m = 1; m <= terms; ++m) {
      // next = term * (Q h) / m
      for (std::size_t i = 0; i < dim; ++i) {
        for (std::size_t j = i; j < dim; ++j) {
          double v = 0.0;
          if (j < n) v -= term[i * dim + j] * rates_[j] * h;
          if (j > i) v += term[i * dim + j - 1] * rates_[j - 1] * h;
          next[i * dim + j] = v / static_cast<double>(m);
        }
      }
      term.swap(next);
      for (std::size_t k = 0; k < dim * dim; ++k) e[k] += term[k];
    }
    for (std::size_t i = 0; i < n; ++i) e[i * dim + i] = std::exp(-rates_[i] * h);
    for (std::size_t k = 0; k < dim * dim; ++k) e[k] = std::max(e[k], 0.0);
    std::vector<double> sq(dim * dim, 0.0);
    for (int s = 0; s < squarings; ++s) {
      for (std::size_t i = 0; i < dim; ++i) {
        for (std::size_t j = i; j < dim; ++j) {
          double v = 0.0;
          for (std::size_t l = i; l <= j; ++l) v += e[i * dim + l] * e[l * dim + j];
          sq[i * dim + j] = v;
        }
      }
      e.swap(sq);
    }
    CompensatedSum alive;
    for (std::size_t j = 0; j < n; ++j) alive += e[j];
    const double rel = 8.0 * kEps * static_cast<double>(dim) * (squarings + 4);
    return {e[n], alive.value(), e[n - 1] * rates_[n - 1], rel};
  }

  std::vector<double> rates_;
  double max_rate_;
  double mean_ = 0.0;
  std::optional<ExpPolyMix> symbolic_;
  bool symbolic_reliable_ = false;
};

}  // namespace hetexp
