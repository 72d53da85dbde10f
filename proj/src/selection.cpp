#include "mpmcmc/selection.hpp"

#include <cmath>

namespace mpmcmc {

double balancing_identity_violation(const WeightRule& rule, double t_min,
                                    double t_max, int points_per_decade) {
  double worst = 0.0;
  const double lo = std::log10(t_min);
  const double hi = std::log10(t_max);
  const int n = static_cast<int>(std::round((hi - lo) * points_per_decade));
  for (int j = 0; j <= n; ++j) {
    const double t = std::pow(10.0, lo + (hi - lo) * j / std::max(1, n));
    const double log_t = std::log(t);
    // g(t)/g(1/t) in log space
    const double lhs = rule.log_weight(log_t) - rule.log_weight(-log_t);
    worst = std::max(worst, std::abs(lhs - log_t) / std::max(1.0, std::abs(log_t)));
  }
  return worst;
}

std::optional<std::vector<double>> normalized_weights(std::span<const double> logw) {
  // Subtract the max before normalizing so that a constant shift of the
  // log weights cancels exactly, not just to rounding.
  double m = kNegInf;
  for (double v : logw) m = std::max(m, v);
  if (m == kNegInf) return std::nullopt;
  std::vector<double> w(logw.size());
  double total = 0.0;
  for (std::size_t i = 0; i < logw.size(); ++i) {
    w[i] = std::exp(logw[i] - m);
    total += w[i];
  }
  for (auto& v : w) v /= total;
  return w;
}

double mtm_log_alpha(std::span<const double> logw_fwd, int i, double logpi_x,
                     double logpi_yi, double logw_rev_x,
                     std::span<const double> logw_rev_shadows,
                     double log_q_ratio_rev_minus_fwd) {
  if (logpi_x == kNegInf)
    throw InvalidStateError("mtm acceptance: current state has zero mass");
  if (logw_fwd[static_cast<std::size_t>(i)] == kNegInf) return kNegInf;
  if (logw_rev_x == kNegInf) return kNegInf;

  const double lse_fwd = log_sum_exp(logw_fwd);
  std::vector<double> rev(logw_rev_shadows.begin(), logw_rev_shadows.end());
  rev.push_back(logw_rev_x);
  const double lse_rev = log_sum_exp(std::span<const double>(rev));

  const double log_ratio = (logw_rev_x - lse_rev) + logpi_yi -
                           (logw_fwd[static_cast<std::size_t>(i)] - lse_fwd) - logpi_x +
                           log_q_ratio_rev_minus_fwd;
  return std::min(0.0, log_ratio);
}

double mtm_acceptance(const CandidateSet& cs, int i, const WeightRule& rule,
                      const ProposalFamily& family,
                      std::optional<MarginalDensities> marginal) {
  if (!cs.shadows) throw InvalidStateError("mtm acceptance: shadows not drawn");
  if (!family.symmetric_marginal() && !marginal)
    throw CapabilityError("mtm acceptance: non-symmetric kind needs marginal densities");

  const double logpi_yi = cs.candidate_logpi[static_cast<std::size_t>(i)];
  std::vector<double> logw_fwd(cs.candidates.size());
  for (std::size_t j = 0; j < cs.candidates.size(); ++j)
    logw_fwd[j] = rule.log_weight(cs.candidate_logpi[j] - cs.current_logpi);

  const double logw_rev_x = rule.log_weight(cs.current_logpi - logpi_yi);
  std::vector<double> logw_rev_shadows(cs.shadows->logpi.size());
  for (std::size_t j = 0; j < logw_rev_shadows.size(); ++j)
    logw_rev_shadows[j] = rule.log_weight(cs.shadows->logpi[j] - logpi_yi);

  const double q_ratio = marginal ? marginal->log_q_rev - marginal->log_q_fwd : 0.0;
  const double la = mtm_log_alpha(logw_fwd, i, cs.current_logpi, logpi_yi,
                                  logw_rev_x, logw_rev_shadows, q_ratio);
  return std::exp(la);
}

MtmOutcome mtm_select_and_accept(CandidateSet& cs, const WeightRule& rule,
                                 const ProposalFamily& family, const Target& target,
                                 EvalBudget& budget, const SubstreamContext& rc,
                                 const WorkerPool* pool) {
  if (cs.current_logpi == kNegInf)
    throw InvalidStateError("mtm step: current state has zero mass");

  const int k = cs.k();
  std::vector<double> logw(static_cast<std::size_t>(k));
  for (int j = 0; j < k; ++j)
    logw[static_cast<std::size_t>(j)] =
        rule.log_weight(cs.candidate_logpi[static_cast<std::size_t>(j)] - cs.current_logpi);

  RngStream select = rc.stream(Purpose::Select);
  const auto pick = categorical_from_log(logw, select.next_double());
  MtmOutcome out;
  if (!pick) {
    out.zero_mass = true;
    return out;
  }
  out.candidate = *pick;
  const Vector& y = cs.candidates[static_cast<std::size_t>(out.candidate)];

  std::optional<MarginalDensities> marginal;
  const Vector* drift_grad = nullptr;
  Vector grad_y;
  if (family.kind == ProposalKind::Langevin) {
    grad_y = target.grad_log_density(y);
    budget.gradient_evals += 1;
    drift_grad = &grad_y;
    if (!cs.current_grad)
      throw InvalidStateError("mtm step: langevin kind needs the cached current gradient");
    marginal = MarginalDensities{
        langevin_log_density(cs.current, y, *cs.current_grad, family.step),
        langevin_log_density(y, cs.current, grad_y, family.step)};
  }

  ShadowSet shadows;
  shadows.points = shadow_conditional(family.kind, cs.current, y, family.step, k,
                                      rc, drift_grad, pool);
  shadows.logpi.resize(shadows.points.size());
  parallel_for(pool, shadows.points.size(), [&](std::size_t j) {
    shadows.logpi[j] = target.log_density(shadows.points[j]);
  });
  budget.density_evals += shadows.points.size();
  cs.shadows = std::move(shadows);

  out.alpha = mtm_acceptance(cs, out.candidate, rule, family, marginal);
  RngStream accept = rc.stream(Purpose::Accept);
  out.accepted = accept.next_double() < out.alpha;
  return out;
}

SelectionProbabilities gmh_probabilities(double logpi_x,
                                         std::span<const double> logpi_y,
                                         ProposalKind kind) {
  ProposalFamily probe{kind, 1.0, std::max<int>(1, static_cast<int>(logpi_y.size()))};
  if (!probe.exchangeable())
    throw CapabilityError("gmh probabilities require an exchangeable proposal kind");
  if (logpi_x == kNegInf)
    throw InvalidStateError("gmh probabilities: current state has zero mass");

  double m = logpi_x;
  for (double v : logpi_y) m = std::max(m, v);

  SelectionProbabilities p;
  p.move.resize(logpi_y.size());
  double total = std::exp(logpi_x - m);
  const double stay_raw = total;
  for (std::size_t i = 0; i < logpi_y.size(); ++i) {
    p.move[i] = logpi_y[i] == kNegInf ? 0.0 : std::exp(logpi_y[i] - m);
    total += p.move[i];
  }
  p.stay = stay_raw / total;
  for (auto& v : p.move) v /= total;
  return p;
}

}  // namespace mpmcmc
