#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "mpmcmc/errors.hpp"

namespace mpmcmc {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Probabilities of staying put vs selecting each of the K candidates.
/// A valid instance lies on the K-simplex: every entry in [0,1] and
/// stay + sum(move) = 1.
struct SelectionProbabilities {
  double stay = 1.0;
  std::vector<double> move;
};

struct SelectionViolation {
  // -1 refers to `stay`, -2 to the total mass, i >= 0 to move[i].
  int index = -2;
  double value = 0.0;
  std::string what;
};

/// Checks range and mass conservation to 1e-12. NaN anywhere is treated
/// as a malformed rule rather than a numeric violation.
inline std::optional<SelectionViolation> validate_selection(
    const SelectionProbabilities& p, double tol = 1e-12) {
  auto check = [&](double v, int idx) -> std::optional<SelectionViolation> {
    if (std::isnan(v)) throw MalformedRuleError("selection probability is NaN");
    if (v < -tol || v > 1.0 + tol)
      return SelectionViolation{idx, v, "entry outside [0,1]"};
    return std::nullopt;
  };
  if (auto v = check(p.stay, -1)) return v;
  double total = p.stay;
  for (std::size_t i = 0; i < p.move.size(); ++i) {
    if (auto v = check(p.move[i], static_cast<int>(i))) return v;
    total += p.move[i];
  }
  if (std::abs(total - 1.0) > tol)
    return SelectionViolation{-2, total, "total mass differs from 1"};
  return std::nullopt;
}

/// Mergeable counters of target evaluations. Workers accumulate privately
/// and results are summed, so totals do not depend on scheduling.
struct EvalBudget {
  std::uint64_t density_evals = 0;
  std::uint64_t gradient_evals = 0;

  EvalBudget& operator+=(const EvalBudget& o) {
    density_evals += o.density_evals;
    gradient_evals += o.gradient_evals;
    return *this;
  }
};

inline EvalBudget operator+(EvalBudget a, const EvalBudget& b) { return a += b; }

}  // namespace mpmcmc
