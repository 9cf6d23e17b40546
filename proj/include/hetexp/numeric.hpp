#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace hetexp {

/// Violated precondition on an argument (bad index, non-positive rate, ...).
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Floating point trouble: overflow, underflow, non-convergence, cancellation.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A configured size cap (terms, degree, sample size) was exceeded.
class LimitExceeded : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

inline constexpr double kEps = std::numeric_limits<double>::epsilon();

/// Neumaier's variant of Kahan summation.
class CompensatedSum {
 public:
  CompensatedSum() = default;
  explicit CompensatedSum(double init) : sum_(init) {}

  CompensatedSum& operator+=(double v) {
    const double t = sum_ + v;
    if (std::abs(sum_) >= std::abs(v)) {
      comp_ += (sum_ - t) + v;
    } else {
      comp_ += (v - t) + sum_;
    }
    sum_ = t;
    return *this;
  }

  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

inline double compensated_sum(const std::vector<double>& values) {
  CompensatedSum acc;
  for (double v : values) acc += v;
  return acc.value();
}

/// n! as a double; exact up to 22!.
inline double factorial(int n) {
  if (n < 0) throw InvalidArgument("factorial of negative integer");
  double r = 1.0;
  for (int i = 2; i <= n; ++i) r *= i;
  return r;
}

/// Binomial coefficient C(n, k) as a double, 0 outside 0 <= k <= n.
inline double binomial(int n, int k) {
  if (k < 0 || n < 0 || k > n) return 0.0;
  k = std::min(k, n - k);
  double r = 1.0;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return std::round(r);
}

inline bool rates_tied(double a, double b, double rel_tol) {
  return std::abs(a - b) <= rel_tol * std::max(std::abs(a), std::abs(b));
}

}  // namespace hetexp
