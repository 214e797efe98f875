#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <vector>

namespace phex {

// Floor for log-space divisions so clamped indicator beliefs (log 0) do not
// propagate -inf through message subtractions.
inline constexpr double kLogFloor = -700.0;

// Finite couplings above this saturate double-precision factor ratios.
inline constexpr double kMaxCoupling = 16.0;

inline double log_sum_exp(double a, double b) {
  if (a == -std::numeric_limits<double>::infinity()) return b;
  if (b == -std::numeric_limits<double>::infinity()) return a;
  const double m = std::max(a, b);
  return m + std::log(std::exp(a - m) + std::exp(b - m));
}

inline double log_sum_exp(std::span<const double> xs) {
  double m = -std::numeric_limits<double>::infinity();
  for (double x : xs) m = std::max(m, x);
  if (m == -std::numeric_limits<double>::infinity()) return m;
  double s = 0.0;
  for (double x : xs) s += std::exp(x - m);
  return m + std::log(s);
}

inline double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

// Streaming log-sum-exp accumulator; keeps a running max so that weights with
// exponents of order u * edges never overflow.
class LogAccumulator {
 public:
  void add(double log_w) {
    if (log_w == -std::numeric_limits<double>::infinity()) return;
    if (empty_) {
      max_ = log_w;
      sum_ = 1.0;
      empty_ = false;
      return;
    }
    if (log_w > max_) {
      sum_ = sum_ * std::exp(max_ - log_w) + 1.0;
      max_ = log_w;
    } else {
      sum_ += std::exp(log_w - max_);
    }
  }

  bool empty() const { return empty_; }

  double log_total() const {
    if (empty_) return -std::numeric_limits<double>::infinity();
    return max_ + std::log(sum_);
  }

 private:
  bool empty_ = true;
  double max_ = 0.0;
  double sum_ = 0.0;
};

inline bool all_finite(std::span<const double> xs) {
  return std::all_of(xs.begin(), xs.end(),
                     [](double x) { return std::isfinite(x); });
}

}  // namespace phex
