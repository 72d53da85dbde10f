#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <span>
#include <vector>

#include "mpmcmc/errors.hpp"

namespace mpmcmc {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

/// log(sum exp(v_i)) if at least one v_i > -inf, otherwise nullopt
/// (the zero-mass case). Shift by the max keeps every exp argument
/// non-positive, so inputs of any magnitude cannot overflow.
inline std::optional<double> try_log_sum_exp(std::span<const double> values) {
  double m = kNegInf;
  for (double v : values) m = std::max(m, v);
  if (m == kNegInf) return std::nullopt;
  if (std::isinf(m)) return m;  // +inf input dominates
  double s = 0.0;
  for (double v : values) s += std::exp(v - m);
  return m + std::log(s);
}

/// Same as try_log_sum_exp but the all-(-inf) case is an error.
inline double log_sum_exp(std::span<const double> values) {
  auto r = try_log_sum_exp(values);
  if (!r) throw DomainError("log_sum_exp: all inputs are -inf (zero total mass)");
  return *r;
}

inline double log_sum_exp(std::initializer_list<double> values) {
  return log_sum_exp(std::span<const double>(values.begin(), values.size()));
}

/// log(1 + exp(t)) without overflow or catastrophic cancellation.
inline double log1p_exp(double t) {
  if (t > 33.3) return t;
  if (t > 18.0) return t + std::exp(-t);
  if (t > -37.0) return std::log1p(std::exp(t));
  return std::exp(t);
}

/// Logistic function 1 / (1 + exp(-t)).
inline double sigmoid(double t) {
  if (t >= 0) {
    const double e = std::exp(-t);
    return 1.0 / (1.0 + e);
  }
  const double e = std::exp(t);
  return e / (1.0 + e);
}

/// Kahan-compensated accumulator for long sums at tight tolerances.
class CompensatedSum {
 public:
  void add(double v) {
    const double y = v - c_;
    const double t = s_ + y;
    c_ = (t - s_) - y;
    s_ = t;
  }
  double value() const { return s_; }

 private:
  double s_ = 0.0;
  double c_ = 0.0;
};

/// Draw an index from unnormalized log weights using a single uniform.
/// Entries equal to -inf carry zero probability. Returns nullopt when
/// every entry is -inf.
inline std::optional<int> categorical_from_log(std::span<const double> logw, double u) {
  double m = kNegInf;
  for (double v : logw) m = std::max(m, v);
  if (m == kNegInf) return std::nullopt;
  double total = 0.0;
  for (double v : logw) total += std::exp(v - m);
  const double target = u * total;
  double cum = 0.0;
  int last_positive = -1;
  for (std::size_t i = 0; i < logw.size(); ++i) {
    const double w = std::exp(logw[i] - m);
    if (w > 0.0) last_positive = static_cast<int>(i);
    cum += w;
    if (target < cum && w > 0.0) return static_cast<int>(i);
  }
  return last_positive;  // u rounded past the last positive mass
}

/// Draw an index from nonnegative linear-scale weights.
inline int categorical_from_linear(std::span<const double> w, double u) {
  double total = 0.0;
  for (double v : w) total += v;
  const double target = u * total;
  double cum = 0.0;
  int last_positive = 0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (w[i] > 0.0) last_positive = static_cast<int>(i);
    cum += w[i];
    if (target < cum && w[i] > 0.0) return static_cast<int>(i);
  }
  return last_positive;
}

}  // namespace mpmcmc
