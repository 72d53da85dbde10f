#pragma once

#include <map>
#include <optional>
#include <vector>

#include "mpmcmc/proposal.hpp"
#include "mpmcmc/rng.hpp"
#include "mpmcmc/selection.hpp"
#include "mpmcmc/target.hpp"
#include "mpmcmc/types.hpp"

namespace mpmcmc {

/// Translation-invariant joint proposal over integer offsets in [-2, 2],
/// the discrete analogue of each Gaussian kind:
///   iid        - offsets iid Binomial(4,1/2)-2, pmf (1,4,6,4,1)/16
///   star       - latent offset u and per-candidate increments e_i, both
///                triangular (1,2,1)/4 on {-1,0,1}; exchangeable by
///                construction and with the same marginal as iid
///   antithetic - iid base pmf tilted by exp(-gamma sum_{i<j} o_i o_j),
///                an exchangeable joint with negatively correlated offsets
/// All pmfs are symmetric under global sign flip, so every marginal is
/// symmetric and the marginal ratio in MH-type acceptances is 1.
class DiscreteProposalTable {
 public:
  struct Entry {
    std::vector<int> offsets;
    double prob;
  };

  static DiscreteProposalTable build(ProposalKind kind, int k);

  int k() const { return k_; }
  ProposalKind kind() const { return kind_; }

  const std::vector<Entry>& joint() const { return joint_; }
  double joint_pmf(std::span<const int> offsets) const;

  /// Marginal pmf of any single coordinate (they coincide by
  /// exchangeability), indexed by offset.
  double marginal_pmf(int offset) const;
  const std::map<int, double>& marginal() const { return marginal_; }

  /// Conditional joint of the remaining K-1 offsets given one coordinate
  /// equal to `delta`; identical for every coordinate by exchangeability.
  const std::vector<Entry>& conditional(int delta) const;

  std::vector<int> sample_joint(RngStream& rng) const;
  std::vector<int> sample_conditional(int delta, RngStream& rng) const;

 private:
  ProposalKind kind_ = ProposalKind::IidGaussian;
  int k_ = 1;
  std::vector<Entry> joint_;
  std::map<int, double> marginal_;
  std::map<int, std::vector<Entry>> conditionals_;
};

enum class Algorithm { Mtm, Gmh, Mh };

std::string to_string(Algorithm a);

/// Sampler description on a finite integer state space. For Algorithm::Mh
/// the proposal is the marginal of the `kind` joint with `num_candidates`
/// components (all marginals coincide, so this is the equal mixture).
struct DiscreteSamplerSpec {
  Algorithm algorithm = Algorithm::Mh;
  ProposalKind kind = ProposalKind::IidGaussian;
  int num_candidates = 1;
  std::optional<WeightRule> weights;

  void validate() const;
};

/// The MH spec whose proposal is the equal mixture of the K marginals.
DiscreteSamplerSpec discrete_mh_baseline(const DiscreteSamplerSpec& spec);

struct DiscreteStepResult {
  long next = 0;
  int selected_index = 0;  // 0 = stay, i+1 = moved to candidate i
  bool zero_mass = false;
};

/// One transition of the discrete sampler, using the same selection logic
/// as the continuous chains but with stencil proposals.
DiscreteStepResult discrete_step(const DiscreteSamplerSpec& spec,
                                 const DiscreteTarget& target,
                                 const DiscreteProposalTable& table, long x,
                                 const SubstreamContext& rc);

struct DiscreteTrace {
  std::vector<long> states;
  std::uint64_t seed = 0;
};

DiscreteTrace run_discrete_chain(const DiscreteSamplerSpec& spec,
                                 const DiscreteTarget& target, long x0,
                                 int iterations, std::uint64_t seed);

}  // namespace mpmcmc
