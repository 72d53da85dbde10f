#include "mpmcmc/discrete.hpp"

#include <algorithm>
#include <cmath>

#include "mpmcmc/numeric.hpp"

namespace mpmcmc {

namespace {

constexpr int kMinOffset = -2;
constexpr int kMaxOffset = 2;
constexpr double kAntitheticGamma = 0.25;

double base_pmf(int offset) {
  switch (offset) {
    case -2: case 2: return 1.0 / 16.0;
    case -1: case 1: return 4.0 / 16.0;
    case 0: return 6.0 / 16.0;
    default: return 0.0;
  }
}

double triangular_pmf(int offset) {
  switch (offset) {
    case -1: case 1: return 0.25;
    case 0: return 0.5;
    default: return 0.0;
  }
}

void enumerate_tuples(int k, std::vector<int>& current,
                      const std::function<void(const std::vector<int>&)>& visit) {
  if (static_cast<int>(current.size()) == k) {
    visit(current);
    return;
  }
  for (int o = kMinOffset; o <= kMaxOffset; ++o) {
    current.push_back(o);
    enumerate_tuples(k, current, visit);
    current.pop_back();
  }
}

double joint_weight(ProposalKind kind, const std::vector<int>& offsets) {
  switch (kind) {
    case ProposalKind::IidGaussian: {
      double p = 1.0;
      for (int o : offsets) p *= base_pmf(o);
      return p;
    }
    case ProposalKind::Star: {
      double p = 0.0;
      for (int u = -1; u <= 1; ++u) {
        double term = triangular_pmf(u);
        for (int o : offsets) term *= triangular_pmf(o - u);
        p += term;
      }
      return p;
    }
    case ProposalKind::AntitheticGaussian: {
      double p = 1.0;
      for (int o : offsets) p *= base_pmf(o);
      double inter = 0.0;
      for (std::size_t i = 0; i < offsets.size(); ++i)
        for (std::size_t j = i + 1; j < offsets.size(); ++j)
          inter += static_cast<double>(offsets[i] * offsets[j]);
      return p * std::exp(-kAntitheticGamma * inter);
    }
    default:
      throw CapabilityError("no discrete analogue for kind " + to_string(kind));
  }
}

int sample_entry(const std::vector<DiscreteProposalTable::Entry>& entries,
                 RngStream& rng) {
  const double u = rng.next_double();
  double cum = 0.0;
  int last = 0;
  for (std::size_t i = 0; i < entries.size(); ++i) {
    if (entries[i].prob > 0.0) last = static_cast<int>(i);
    cum += entries[i].prob;
    if (u < cum && entries[i].prob > 0.0) return static_cast<int>(i);
  }
  return last;
}

}  // namespace

DiscreteProposalTable DiscreteProposalTable::build(ProposalKind kind, int k) {
  if (k < 1) throw InvalidConfigError("discrete proposal: K must be >= 1");
  if (k > 6) throw SizeError("discrete proposal: offset table too large for K > 6");
  if (kind == ProposalKind::AntitheticGaussian && k < 2)
    throw InvalidConfigError("antithetic proposal requires K >= 2");

  DiscreteProposalTable t;
  t.kind_ = kind;
  t.k_ = k;

  double total = 0.0;
  std::vector<int> scratch;
  enumerate_tuples(k, scratch, [&](const std::vector<int>& offsets) {
    const double w = joint_weight(kind, offsets);
    t.joint_.push_back({offsets, w});
    total += w;
  });
  for (auto& e : t.joint_) e.prob /= total;

  for (const auto& e : t.joint_) t.marginal_[e.offsets[0]] += e.prob;

  // Conditional of the remaining coordinates given coordinate 0; valid for
  // any coordinate because the joint is exchangeable.
  for (int delta = kMinOffset; delta <= kMaxOffset; ++delta) {
    const double md = t.marginal_pmf(delta);
    std::vector<Entry> cond;
    if (k == 1) {
      cond.push_back({{}, 1.0});
    } else {
      for (const auto& e : t.joint_) {
        if (e.offsets[0] != delta) continue;
        std::vector<int> rest(e.offsets.begin() + 1, e.offsets.end());
        cond.push_back({std::move(rest), md > 0 ? e.prob / md : 0.0});
      }
    }
    t.conditionals_[delta] = std::move(cond);
  }
  return t;
}

double DiscreteProposalTable::joint_pmf(std::span<const int> offsets) const {
  for (const auto& e : joint_) {
    if (std::equal(e.offsets.begin(), e.offsets.end(), offsets.begin(), offsets.end()))
      return e.prob;
  }
  return 0.0;
}

double DiscreteProposalTable::marginal_pmf(int offset) const {
  const auto it = marginal_.find(offset);
  return it == marginal_.end() ? 0.0 : it->second;
}

const std::vector<DiscreteProposalTable::Entry>& DiscreteProposalTable::conditional(
    int delta) const {
  const auto it = conditionals_.find(delta);
  if (it == conditionals_.end())
    throw DomainError("discrete proposal: conditioned offset outside stencil");
  return it->second;
}

std::vector<int> DiscreteProposalTable::sample_joint(RngStream& rng) const {
  return joint_[static_cast<std::size_t>(sample_entry(joint_, rng))].offsets;
}

std::vector<int> DiscreteProposalTable::sample_conditional(int delta,
                                                           RngStream& rng) const {
  const auto& cond = conditional(delta);
  return cond[static_cast<std::size_t>(sample_entry(cond, rng))].offsets;
}

std::string to_string(Algorithm a) {
  switch (a) {
    case Algorithm::Mtm: return "mtm";
    case Algorithm::Gmh: return "gmh";
    case Algorithm::Mh: return "mh";
  }
  return "?";
}

void DiscreteSamplerSpec::validate() const {
  if (num_candidates < 1) throw InvalidConfigError("sampler: K must be >= 1");
  if (algorithm == Algorithm::Mtm && !weights)
    throw InvalidConfigError("mtm sampler requires a weight rule");
  if (algorithm == Algorithm::Gmh) {
    ProposalFamily probe{kind, 1.0, num_candidates};
    if (!probe.exchangeable())
      throw InvalidConfigError("gmh sampler requires an exchangeable proposal kind");
  }
  if (kind == ProposalKind::AntitheticGaussian && num_candidates < 2)
    throw InvalidConfigError("antithetic proposal requires K >= 2");
}

DiscreteSamplerSpec discrete_mh_baseline(const DiscreteSamplerSpec& spec) {
  DiscreteSamplerSpec base = spec;
  base.algorithm = Algorithm::Mh;
  base.weights.reset();
  return base;
}

namespace {

DiscreteStepResult mh_step(const DiscreteTarget& target,
                           const DiscreteProposalTable& table, long x,
                           const SubstreamContext& rc) {
  // Single proposal from the (symmetric) marginal of the joint table.
  RngStream crng = rc.stream(Purpose::Candidates, 0);
  const double u = crng.next_double();
  double cum = 0.0;
  int offset = 0;
  for (const auto& [o, p] : table.marginal()) {
    cum += p;
    if (u < cum) {
      offset = o;
      break;
    }
    offset = o;
  }
  const long y = x + offset;
  DiscreteStepResult out;
  out.next = x;
  const double la = target.log_mass(y) - target.log_mass(x);
  RngStream arng = rc.stream(Purpose::Accept);
  if (la >= 0.0 || std::log(arng.next_double_open()) < la) {
    out.next = y;
    out.selected_index = 1;
  }
  return out;
}

}  // namespace

DiscreteStepResult discrete_step(const DiscreteSamplerSpec& spec,
                                 const DiscreteTarget& target,
                                 const DiscreteProposalTable& table, long x,
                                 const SubstreamContext& rc) {
  if (target.log_mass(x) == kNegInf)
    throw InvalidStateError("discrete step: current state outside support");

  if (spec.algorithm == Algorithm::Mh) return mh_step(target, table, x, rc);

  RngStream crng = rc.stream(Purpose::Candidates, 0);
  const std::vector<int> offsets = table.sample_joint(crng);
  std::vector<long> ys(offsets.size());
  std::vector<double> logpi(offsets.size());
  for (std::size_t i = 0; i < offsets.size(); ++i) {
    ys[i] = x + offsets[i];
    logpi[i] = target.log_mass(ys[i]);
  }
  const double logpi_x = target.log_mass(x);

  DiscreteStepResult out;
  out.next = x;

  if (spec.algorithm == Algorithm::Gmh) {
    const SelectionProbabilities h = gmh_probabilities(logpi_x, logpi, spec.kind);
    std::vector<double> probs;
    probs.reserve(h.move.size() + 1);
    probs.push_back(h.stay);
    probs.insert(probs.end(), h.move.begin(), h.move.end());
    RngStream srng = rc.stream(Purpose::Select);
    const int pick = categorical_from_linear(probs, srng.next_double());
    out.selected_index = pick;
    if (pick > 0) out.next = ys[static_cast<std::size_t>(pick - 1)];
    return out;
  }

  // MTM path: weight draw, conditional shadows, ratio-of-normalized-weights
  // acceptance.
  const WeightRule& rule = *spec.weights;
  std::vector<double> logw(logpi.size());
  for (std::size_t j = 0; j < logpi.size(); ++j)
    logw[j] = rule.log_weight(logpi[j] - logpi_x);

  RngStream srng = rc.stream(Purpose::Select);
  const auto pick = categorical_from_log(logw, srng.next_double());
  if (!pick) {
    out.zero_mass = true;
    return out;
  }
  const int i = *pick;
  const long yi = ys[static_cast<std::size_t>(i)];
  const double logpi_yi = logpi[static_cast<std::size_t>(i)];

  RngStream shrng = rc.stream(Purpose::Shadows, 0);
  const int delta = static_cast<int>(x - yi);
  const std::vector<int> shadow_offsets = table.sample_conditional(delta, shrng);
  std::vector<double> logw_rev_shadows(shadow_offsets.size());
  for (std::size_t j = 0; j < shadow_offsets.size(); ++j) {
    const long sj = yi + shadow_offsets[j];
    logw_rev_shadows[j] = rule.log_weight(target.log_mass(sj) - logpi_yi);
  }
  const double logw_rev_x = rule.log_weight(logpi_x - logpi_yi);
  const double la = mtm_log_alpha(logw, i, logpi_x, logpi_yi, logw_rev_x,
                                  logw_rev_shadows, 0.0);
  RngStream arng = rc.stream(Purpose::Accept);
  if (std::log(arng.next_double_open()) < la) {
    out.next = yi;
    out.selected_index = i + 1;
  }
  return out;
}

DiscreteTrace run_discrete_chain(const DiscreteSamplerSpec& spec,
                                 const DiscreteTarget& target, long x0,
                                 int iterations, std::uint64_t seed) {
  spec.validate();
  const DiscreteProposalTable table =
      DiscreteProposalTable::build(spec.kind, spec.num_candidates);
  DiscreteTrace trace;
  trace.seed = seed;
  trace.states.reserve(static_cast<std::size_t>(iterations) + 1);
  trace.states.push_back(x0);
  long x = x0;
  for (int t = 0; t < iterations; ++t) {
    const SubstreamContext rc(seed, 0, static_cast<std::uint64_t>(t));
    x = discrete_step(spec, target, table, x, rc).next;
    trace.states.push_back(x);
  }
  return trace;
}

}  // namespace mpmcmc
