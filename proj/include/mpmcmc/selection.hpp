#pragma once

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mpmcmc/numeric.hpp"
#include "mpmcmc/proposal.hpp"
#include "mpmcmc/rng.hpp"
#include "mpmcmc/target.hpp"
#include "mpmcmc/types.hpp"

namespace mpmcmc {

/// Candidate weight function w(x, y) as a function of the target ratio
/// t = pi(y)/pi(x). Globally balanced uses w = t; locally balanced uses
/// w = g(t) with g(t)/g(1/t) = t (the square-root rule g = sqrt here).
struct WeightRule {
  enum class Kind { GloballyBalanced, LocallyBalancedSqrt, CustomG };

  Kind kind = Kind::GloballyBalanced;
  /// Custom balancing function on the linear scale; only consulted for
  /// Kind::CustomG. Beware of overflow for extreme ratios.
  std::function<double(double)> g;

  static WeightRule globally_balanced() { return {Kind::GloballyBalanced, nullptr}; }
  static WeightRule locally_balanced_sqrt() { return {Kind::LocallyBalancedSqrt, nullptr}; }
  static WeightRule custom(std::function<double(double)> fn) {
    return {Kind::CustomG, std::move(fn)};
  }

  /// log w given log(pi(y)/pi(x)). -inf in, -inf out.
  double log_weight(double log_ratio) const {
    switch (kind) {
      case Kind::GloballyBalanced: return log_ratio;
      case Kind::LocallyBalancedSqrt: return 0.5 * log_ratio;
      case Kind::CustomG: {
        if (log_ratio == kNegInf) return kNegInf;
        const double v = g(std::exp(log_ratio));
        return v > 0 ? std::log(v) : kNegInf;
      }
    }
    return kNegInf;
  }

  std::string id() const {
    switch (kind) {
      case Kind::GloballyBalanced: return "gb";
      case Kind::LocallyBalancedSqrt: return "lb";
      case Kind::CustomG: return "custom";
    }
    return "?";
  }
};

/// Largest violation of g(t)/g(1/t) = t over a log-spaced grid of ratios.
double balancing_identity_violation(const WeightRule& rule,
                                    double t_min = 1e-6, double t_max = 1e6,
                                    int points_per_decade = 1);

/// Normalized weights w_i / sum_j w_j from log weights, computed through
/// a max-shifted exponential sum. nullopt when every weight is zero.
std::optional<std::vector<double>> normalized_weights(std::span<const double> logw);

/// Current state, candidates, cached log densities and (for MTM, after
/// index selection) the shadow points.
struct ShadowSet {
  std::vector<Vector> points;
  std::vector<double> logpi;
};

struct CandidateSet {
  Vector current;
  double current_logpi = 0.0;
  std::vector<Vector> candidates;
  std::vector<double> candidate_logpi;
  std::optional<Vector> current_grad;  // cached for Langevin kinds
  std::optional<ShadowSet> shadows;

  int k() const { return static_cast<int>(candidates.size()); }
};

/// Core acceptance log-probability shared by the sampling and the exact
/// enumeration paths.
///   log alpha = min(0, [wbar_rev + log pi(y_i) + log q(y_i,x)]
///                    - [wbar_fwd + log pi(x) + log q(x,y_i)])
/// where wbar_rev normalizes w(y_i, x) against the shadow weights and
/// wbar_fwd normalizes w(x, y_i) against the other candidates.
double mtm_log_alpha(std::span<const double> logw_fwd, int i, double logpi_x,
                     double logpi_yi, double logw_rev_x,
                     std::span<const double> logw_rev_shadows,
                     double log_q_ratio_rev_minus_fwd);

/// Densities of a non-symmetric marginal kernel (Langevin), entering the
/// acceptance ratio as q(y_i, x) / q(x, y_i).
struct MarginalDensities {
  double log_q_fwd = 0.0;
  double log_q_rev = 0.0;
};

/// Acceptance probability alpha_i for a complete CandidateSet (shadows
/// filled). For symmetric kinds the marginal ratio is 1 and `marginal`
/// may be omitted.
double mtm_acceptance(const CandidateSet& cs, int i, const WeightRule& rule,
                      const ProposalFamily& family,
                      std::optional<MarginalDensities> marginal = std::nullopt);

struct MtmOutcome {
  int candidate = -1;   // index chosen by the weight draw, -1 when zero-mass
  bool accepted = false;
  bool zero_mass = false;
  double alpha = 0.0;

  /// Final selection in {0..K}: 0 = stay, i+1 = moved to candidate i.
  int final_index() const { return accepted ? candidate + 1 : 0; }
};

/// Full two-stage MTM selection: weight draw, shadow generation, accept /
/// reject. Fills cs.shadows and charges K-1 shadow density evaluations
/// (plus the gradient at the chosen candidate for the Langevin kind).
MtmOutcome mtm_select_and_accept(CandidateSet& cs, const WeightRule& rule,
                                 const ProposalFamily& family, const Target& target,
                                 EvalBudget& budget, const SubstreamContext& rc,
                                 const WorkerPool* pool = nullptr);

/// Selection probabilities h_i = pi(y_i) / (pi(x) + sum_j pi(y_j)) and the
/// complementary stay mass, valid for exchangeable proposal kinds only.
SelectionProbabilities gmh_probabilities(double logpi_x,
                                         std::span<const double> logpi_y,
                                         ProposalKind kind);

inline SelectionProbabilities gmh_probabilities(const CandidateSet& cs,
                                                ProposalKind kind) {
  return gmh_probabilities(cs.current_logpi,
                           std::span<const double>(cs.candidate_logpi), kind);
}

}  // namespace mpmcmc
