#include "mpmcmc/sampler.hpp"

#include <cmath>

#include "mpmcmc/numeric.hpp"

namespace mpmcmc {

void SamplerSpec::validate() const {
  if (!target) throw InvalidConfigError("sampler: target is required");
  proposal.validate();
  if (algorithm == Algorithm::Mh && proposal.num_candidates != 1)
    throw InvalidConfigError("mh sampler requires K = 1");
  if (algorithm == Algorithm::Mtm && !weights)
    throw InvalidConfigError("mtm sampler requires a weight rule");
  if (algorithm == Algorithm::Gmh && !proposal.exchangeable())
    throw InvalidConfigError("gmh sampler requires an exchangeable proposal kind");
  if (proposal.kind == ProposalKind::Langevin && !target->has_gradient())
    throw CapabilityError("langevin proposal requires a target gradient");
  if (proposal.kind == ProposalKind::Simplicial &&
      proposal.num_candidates > target->dim())
    throw InvalidConfigError("simplicial proposal requires K <= d");
}

StepResult step_detailed(const SamplerSpec& spec, const Vector& x, double logpi_x,
                         const SubstreamContext& rc, CandidateDraw* draw_out,
                         const WorkerPool* pool) {
  if (logpi_x == kNegInf)
    throw InvalidStateError("step: current state has zero target mass");

  StepResult out;
  out.next = x;
  out.next_logpi = logpi_x;

  CandidateDraw draw = sample_candidates(spec.proposal, x, *spec.target,
                                         out.budget, rc, pool);
  const int k = spec.proposal.num_candidates;

  CandidateSet cs;
  cs.current = x;
  cs.current_logpi = logpi_x;
  cs.candidates = draw.candidates;
  cs.candidate_logpi.resize(static_cast<std::size_t>(k));
  parallel_for(pool, static_cast<std::size_t>(k), [&](std::size_t i) {
    cs.candidate_logpi[i] = spec.target->log_density(cs.candidates[i]);
  });
  out.budget.density_evals += static_cast<std::uint64_t>(k);

  if (spec.algorithm == Algorithm::Gmh) {
    const SelectionProbabilities h = gmh_probabilities(cs, spec.proposal.kind);
    std::vector<double> probs;
    probs.reserve(h.move.size() + 1);
    probs.push_back(h.stay);
    probs.insert(probs.end(), h.move.begin(), h.move.end());
    RngStream srng = rc.stream(Purpose::Select);
    const int pick = categorical_from_linear(probs, srng.next_double());
    out.selected_index = pick;
    if (pick > 0) {
      out.next = cs.candidates[static_cast<std::size_t>(pick - 1)];
      out.next_logpi = cs.candidate_logpi[static_cast<std::size_t>(pick - 1)];
    }
  } else {
    // MH runs the MTM path at K = 1: the single normalized weight is 1 on
    // both sides, so the acceptance reduces to the classical MH ratio
    // whatever the weight rule.
    if (spec.proposal.kind == ProposalKind::Langevin)
      cs.current_grad = draw.grad_at_origin;
    const WeightRule rule = spec.weights ? *spec.weights : WeightRule::globally_balanced();
    const MtmOutcome mo = mtm_select_and_accept(cs, rule, spec.proposal,
                                                *spec.target, out.budget, rc, pool);
    out.zero_mass = mo.zero_mass;
    out.selected_index = mo.final_index();
    if (mo.accepted) {
      out.next = cs.candidates[static_cast<std::size_t>(mo.candidate)];
      out.next_logpi = cs.candidate_logpi[static_cast<std::size_t>(mo.candidate)];
    }
  }

  if (draw_out != nullptr) *draw_out = std::move(draw);
  return out;
}

StepResult step(const SamplerSpec& spec, const Vector& x, double logpi_x,
                const SubstreamContext& rc, const WorkerPool* pool) {
  return step_detailed(spec, x, logpi_x, rc, nullptr, pool);
}

ChainTrace run_chain(const SamplerSpec& spec, const Vector& x0, int iterations,
                     std::uint64_t seed, const WorkerPool* pool) {
  spec.validate();
  if (iterations < 1) throw InvalidConfigError("run_chain: need at least 1 iteration");

  ChainTrace trace;
  trace.seed = seed;
  trace.states.reserve(static_cast<std::size_t>(iterations) + 1);
  trace.accepted.reserve(static_cast<std::size_t>(iterations));
  trace.selected_index.reserve(static_cast<std::size_t>(iterations));

  Vector x = x0;
  double logpi_x = spec.target->log_density(x0);  // init eval, not chain cost
  if (logpi_x == kNegInf)
    throw InvalidStateError("run_chain: x0 outside the target support");
  trace.states.push_back(x);

  for (int t = 0; t < iterations; ++t) {
    const SubstreamContext rc(seed, 0, static_cast<std::uint64_t>(t));
    StepResult r;
    try {
      r = step(spec, x, logpi_x, rc, pool);
    } catch (const Error& e) {
      throw InvalidStateError("run_chain: iteration " + std::to_string(t) + ": " +
                              e.what());
    }
    x = r.next;
    logpi_x = r.next_logpi;
    trace.states.push_back(x);
    trace.accepted.push_back(r.selected_index > 0 ? 1 : 0);
    trace.selected_index.push_back(r.selected_index);
    trace.budget += r.budget;
    if (r.zero_mass) ++trace.zero_mass_stays;
  }
  return trace;
}

SamplerSpec mh_baseline_mixture(const SamplerSpec& spec) {
  SamplerSpec base = spec;
  base.algorithm = Algorithm::Mh;
  base.weights.reset();
  base.proposal.num_candidates = 1;
  switch (spec.proposal.kind) {
    case ProposalKind::IidGaussian:
    case ProposalKind::AntitheticGaussian:
    case ProposalKind::Star:
      // All three kinds share the marginal N(x, sigma^2 I).
      base.proposal.kind = ProposalKind::IidGaussian;
      break;
    case ProposalKind::Langevin:
    case ProposalKind::Simplicial:
      base.proposal.kind = spec.proposal.kind;
      break;
  }
  return base;
}

}  // namespace mpmcmc
