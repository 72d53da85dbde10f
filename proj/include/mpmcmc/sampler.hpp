#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "mpmcmc/discrete.hpp"
#include "mpmcmc/proposal.hpp"
#include "mpmcmc/selection.hpp"
#include "mpmcmc/target.hpp"
#include "mpmcmc/types.hpp"

namespace mpmcmc {

/// A complete sampler description: chain driver, proposal kernel, weight
/// rule (MTM) and target.
struct SamplerSpec {
  Algorithm algorithm = Algorithm::Mh;
  ProposalFamily proposal;
  std::optional<WeightRule> weights;
  TargetPtr target;

  void validate() const;
};

struct StepResult {
  Vector next;
  double next_logpi = 0.0;
  int selected_index = 0;  // 0 = stay, i+1 = moved to candidate i
  EvalBudget budget;       // target evaluations charged by this step
  bool zero_mass = false;
};

/// One transition of the multiproposal kernel. The current log density is
/// passed in (it is cached across iterations, which is why an MTM step
/// costs 2K-1 density evaluations: K candidates plus K-1 shadows).
StepResult step(const SamplerSpec& spec, const Vector& x, double logpi_x,
                const SubstreamContext& rc, const WorkerPool* pool = nullptr);

/// Same transition, also reporting the candidate draw for instrumentation.
StepResult step_detailed(const SamplerSpec& spec, const Vector& x, double logpi_x,
                         const SubstreamContext& rc, CandidateDraw* draw_out,
                         const WorkerPool* pool = nullptr);

struct ChainTrace {
  std::vector<Vector> states;        // iterations + 1 entries
  std::vector<std::uint8_t> accepted;
  std::vector<int> selected_index;
  EvalBudget budget;
  std::uint64_t seed = 0;
  std::uint64_t zero_mass_stays = 0;
};

/// Runs the chain for `iterations` transitions with per-iteration
/// substream seeding; bit-reproducible from (spec, x0, iterations, seed)
/// whatever the worker count.
ChainTrace run_chain(const SamplerSpec& spec, const Vector& x0, int iterations,
                     std::uint64_t seed, const WorkerPool* pool = nullptr);

/// The single-proposal MH sampler whose proposal is the equal mixture of
/// the K marginals. Under the kinds implemented here all marginals
/// coincide, so the mixture collapses to one draw of the same family.
SamplerSpec mh_baseline_mixture(const SamplerSpec& spec);

}  // namespace mpmcmc
