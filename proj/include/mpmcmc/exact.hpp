#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "mpmcmc/discrete.hpp"
#include "mpmcmc/target.hpp"
#include "mpmcmc/types.hpp"

namespace mpmcmc {

/// Exact finite-state transition matrix with its stationary law.
struct KernelMatrix {
  std::vector<long> states;
  Matrix P;           // row stochastic
  Vector stationary;  // normalized target mass
};

/// Transition matrix of a sampler on a finite target, by exhaustive
/// enumeration of candidate tuples (and shadow tuples for MTM, realizing
/// the selection probability as the exact integral over shadows). The
/// diagonal is closed so every row sums to 1 exactly.
KernelMatrix build_exact_kernel(const DiscreteSamplerSpec& spec,
                                const DiscreteTarget& target);

/// max_x |sum_y P(x,y) - 1|.
double max_row_sum_error(const KernelMatrix& km);

/// max_x |(pi P)(x) - pi(x)|.
double stationarity_error(const KernelMatrix& km);

struct BalanceViolation {
  int x = 0, y = 0;
  double magnitude = 0.0;
};

/// Worst |pi(x)P(x,y) - pi(y)P(y,x)|; ok (nullopt) iff <= tol.
std::optional<BalanceViolation> detailed_balance_check(const KernelMatrix& km,
                                                       double tol = 1e-10);

/// 1 minus the second-largest eigenvalue of the pi-symmetrized kernel.
/// Requires reversibility; ContractError otherwise.
double spectral_gap(const KernelMatrix& km, double reversibility_tol = 1e-10);

struct PeskunViolation {
  int x = 0, y = 0;
  double lhs = 0.0, rhs = 0.0;
};

/// Entrywise off-diagonal check P_k(x,y) <= K * P_tilde(x,y) + tol.
std::optional<PeskunViolation> peskun_check(const KernelMatrix& pk,
                                            const KernelMatrix& pt, int k,
                                            double tol = 1e-12);

struct GapDomination {
  double gap_k = 0.0;
  double gap_tilde = 0.0;
  double ratio = 0.0;
  bool ok = false;
};

/// Checks Gap(P_k) <= K * Gap(P_tilde) + tol and reports the ratio.
GapDomination gap_domination_check(const KernelMatrix& pk, const KernelMatrix& pt,
                                   int k, double tol = 1e-9);

struct ConductanceResult {
  double phi = 0.0;          // exact conductance by subset enumeration
  double essinf_form = 0.0;  // 2 * min_x P(x, X \ {x}); informational
};

/// Exact conductance over all subsets with 0 < pi(A) <= 1/2. The subset
/// enumeration caps the state count at 25.
ConductanceResult conductance(const KernelMatrix& km);

/// Random reversible chain on n states (for property tests): symmetric
/// flows scaled under a random stationary law.
KernelMatrix random_reversible_chain(int n, std::uint64_t seed);

/// Selection rule on a finite space, as checked by the pointwise
/// reversibility condition below.
using DiscreteSelectionRule =
    std::function<SelectionProbabilities(long x, const std::vector<long>& ys)>;

struct GmhCounterexample {
  long x = 0;
  std::vector<long> ys;
  int i = 0;
  double lhs = 0.0, rhs = 0.0;
};

/// Verifies h_i(x, y) = r_i(x, y) h_i(y_i, (x, y_{-i})) at every
/// enumerable configuration, where r_i is the density ratio
/// pi(y_i) q(y_i, (x, y_{-i})) / (pi(x) q(x, y)). Returns the first
/// violating tuple, or nullopt when the identity holds within tol.
std::optional<GmhCounterexample> gmh_condition_check(
    const DiscreteSelectionRule& h, const DiscreteTarget& target,
    const DiscreteProposalTable& proposal, double tol);

/// The simplified pi-ratio selection rule as a checkable object.
DiscreteSelectionRule gmh_discrete_rule(const DiscreteTarget& target,
                                        ProposalKind kind);

/// CSV export of a kernel matrix (header: state values).
void write_kernel_csv(const std::string& path, const KernelMatrix& km);

}  // namespace mpmcmc
