#include "mpmcmc/validation.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

#include "mpmcmc/bounds.hpp"
#include "mpmcmc/exact.hpp"
#include "mpmcmc/experiment.hpp"
#include "mpmcmc/numeric.hpp"
#include "mpmcmc/proposal.hpp"
#include "mpmcmc/selection.hpp"

namespace mpmcmc {

namespace {

DiscreteTarget five_state_target() {
  return DiscreteTarget({0, 1, 2, 3, 4}, {0.0, 0.7, -0.4, 1.1, 0.3});
}

struct NamedSpec {
  std::string name;
  DiscreteSamplerSpec spec;
};

std::vector<NamedSpec> matrix_suite() {
  std::vector<NamedSpec> out;
  const std::vector<std::pair<std::string, WeightRule>> rules = {
      {"gb", WeightRule::globally_balanced()},
      {"lb", WeightRule::locally_balanced_sqrt()}};
  for (const auto& [rname, rule] : rules) {
    for (int k : {1, 2, 3})
      out.push_back({"mtm-iid-" + rname + "-k" + std::to_string(k),
                     {Algorithm::Mtm, ProposalKind::IidGaussian, k, rule}});
    for (int k : {2, 3})  // the antithetic joint needs K >= 2
      out.push_back({"mtm-anti-" + rname + "-k" + std::to_string(k),
                     {Algorithm::Mtm, ProposalKind::AntitheticGaussian, k, rule}});
  }
  for (int k : {1, 2, 3})
    out.push_back({"gmh-star-k" + std::to_string(k),
                   {Algorithm::Gmh, ProposalKind::Star, k, std::nullopt}});
  return out;
}

std::string fmt(double v) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%.3g", v);
  return buf;
}

CheckResult reversibility_check() {
  const DiscreteTarget target = five_state_target();
  double worst = 0.0;
  std::string worst_name;
  for (const auto& [name, spec] : matrix_suite()) {
    const KernelMatrix km = build_exact_kernel(spec, target);
    const auto v = detailed_balance_check(km, 0.0);
    const double mag = v ? v->magnitude : 0.0;
    if (mag > worst) {
      worst = mag;
      worst_name = name;
    }
  }
  return {"reversibility (exact kernels, MTM variants + GMH-star)", worst <= 1e-10,
          "max detailed-balance violation " + fmt(worst) +
              (worst_name.empty() ? "" : " at " + worst_name) + " (tol 1e-10)"};
}

CheckResult peskun_check_all() {
  const DiscreteTarget target = five_state_target();
  bool ok = true;
  std::string detail = "P^(K) <= K P~ entrywise + 1e-12";
  for (const auto& [name, spec] : matrix_suite()) {
    const KernelMatrix pk = build_exact_kernel(spec, target);
    const KernelMatrix pt = build_exact_kernel(discrete_mh_baseline(spec), target);
    if (const auto v = peskun_check(pk, pt, spec.num_candidates)) {
      ok = false;
      detail = name + " violates at (" + std::to_string(v->x) + "," +
               std::to_string(v->y) + "): " + fmt(v->lhs) + " > " + fmt(v->rhs);
      break;
    }
  }
  return {"peskun ordering", ok, detail};
}

CheckResult gap_domination_all() {
  const DiscreteTarget target = five_state_target();
  bool ok = true;
  double worst_slack = -1e300;
  std::string detail;
  for (const auto& [name, spec] : matrix_suite()) {
    const KernelMatrix pk = build_exact_kernel(spec, target);
    const KernelMatrix pt = build_exact_kernel(discrete_mh_baseline(spec), target);
    const GapDomination g = gap_domination_check(pk, pt, spec.num_candidates);
    worst_slack = std::max(worst_slack, g.ratio - spec.num_candidates);
    if (!g.ok) {
      ok = false;
      detail = name + ": gap ratio " + fmt(g.ratio) + " > K=" +
               std::to_string(spec.num_candidates);
      break;
    }
  }
  if (ok) detail = "max ratio-minus-K " + fmt(worst_slack) + " (tol 1e-9)";
  return {"gap domination Gap(P^K) <= K Gap(P~)", ok, detail};
}

CheckResult conductance_all() {
  const DiscreteTarget target = five_state_target();
  double worst = -1e300;
  for (const auto& [name, spec] : matrix_suite()) {
    const KernelMatrix km = build_exact_kernel(spec, target);
    const double gap = spectral_gap(km);
    const double phi = conductance(km).phi;
    worst = std::max(worst, gap - 2.0 * phi);
  }
  for (int i = 0; i < 100; ++i) {
    const int n = 2 + static_cast<int>(i % 7);
    const KernelMatrix km = random_reversible_chain(n, 1000 + static_cast<std::uint64_t>(i));
    const double gap = spectral_gap(km, 1e-9);
    const double phi = conductance(km).phi;
    worst = std::max(worst, gap - 2.0 * phi);
  }
  return {"conductance Gap <= 2 Phi (kernel suite + 100 random chains)", worst <= 1e-9,
          "max Gap - 2 Phi = " + fmt(worst)};
}

CheckResult mh_degeneracy_check() {
  const DiscreteTarget target = five_state_target();
  double worst = 0.0;
  for (const auto& rule :
       {WeightRule::globally_balanced(), WeightRule::locally_balanced_sqrt()}) {
    const DiscreteSamplerSpec mtm{Algorithm::Mtm, ProposalKind::IidGaussian, 1, rule};
    const DiscreteSamplerSpec mh{Algorithm::Mh, ProposalKind::IidGaussian, 1, std::nullopt};
    const KernelMatrix a = build_exact_kernel(mtm, target);
    const KernelMatrix b = build_exact_kernel(mh, target);
    worst = std::max(worst, (a.P - b.P).cwiseAbs().maxCoeff());
  }
  return {"MH degeneracy: MTM K=1 equals MH entrywise", worst <= 1e-12,
          "max entry difference " + fmt(worst) + " (tol 1e-12)"};
}

CheckResult geometry_check() {
  std::ostringstream detail;
  bool ok = true;

  // Simplicial: radius = side = lambda, orthogonal rotation.
  {
    const int d = 8, k = 5;
    const double lambda = 0.7;
    const Vector x = Vector::LinSpaced(d, -1.0, 1.0);
    double worst_geom = 0.0, worst_orth = 0.0;
    for (int rep = 0; rep < 50; ++rep) {
      const SubstreamContext rc(99, 0, static_cast<std::uint64_t>(rep));
      const CandidateDraw draw = sample_simplicial(x, lambda, k, rc);
      for (int i = 0; i < k; ++i) {
        worst_geom = std::max(
            worst_geom, std::abs((draw.candidates[static_cast<std::size_t>(i)] - x).norm() - lambda));
        for (int j = i + 1; j < k; ++j)
          worst_geom = std::max(worst_geom,
                                std::abs((draw.candidates[static_cast<std::size_t>(i)] -
                                          draw.candidates[static_cast<std::size_t>(j)])
                                             .norm() -
                                         lambda));
      }
      const Matrix& r = *draw.rotation;
      worst_orth = std::max(worst_orth,
                            (r.transpose() * r - Matrix::Identity(d, d)).cwiseAbs().maxCoeff());
    }
    ok = ok && worst_geom <= 1e-10 && worst_orth <= 1e-12;
    detail << "simplex distance err " << fmt(worst_geom) << ", orthogonality err "
           << fmt(worst_orth);
  }

  // Antithetic: increments sum to zero; pairwise correlation -1/(K-1).
  {
    const int d = 3, k = 3;
    const Vector x = Vector::Zero(d);
    double worst_sum = 0.0;
    for (int rep = 0; rep < 1000; ++rep) {
      const SubstreamContext rc(7, 1, static_cast<std::uint64_t>(rep));
      const CandidateDraw draw = sample_antithetic_gaussian(x, 1.0, k, rc);
      Vector s = Vector::Zero(d);
      for (const auto& y : draw.candidates) s += (y - x);
      worst_sum = std::max(worst_sum, s.cwiseAbs().maxCoeff());
    }
    const int n = 100000;
    double s1 = 0, s2 = 0, s11 = 0, s22 = 0, s12 = 0;
    for (int rep = 0; rep < n; ++rep) {
      const SubstreamContext rc(8, 2, static_cast<std::uint64_t>(rep));
      const CandidateDraw draw = sample_antithetic_gaussian(Vector::Zero(1), 1.0, k, rc);
      const double a = draw.candidates[0][0];
      const double b = draw.candidates[1][0];
      s1 += a;
      s2 += b;
      s11 += a * a;
      s22 += b * b;
      s12 += a * b;
    }
    const double m1 = s1 / n, m2 = s2 / n;
    const double v1 = s11 / n - m1 * m1, v2 = s22 / n - m2 * m2;
    const double corr = (s12 / n - m1 * m2) / std::sqrt(v1 * v2);
    const double target_corr = -0.5;
    const double se = (1.0 - target_corr * target_corr) / std::sqrt(static_cast<double>(n));
    const bool corr_ok = std::abs(corr - target_corr) <= 3.0 * se;
    ok = ok && worst_sum <= 1e-12 && corr_ok;
    detail << "; antithetic sum-zero err " << fmt(worst_sum) << ", corr " << fmt(corr)
           << " vs -1/2 (3se=" << fmt(3 * se) << ")";
  }
  return {"proposal geometry (simplicial + antithetic)", ok, detail.str()};
}

CheckResult balancing_check() {
  const double v = balancing_identity_violation(WeightRule::locally_balanced_sqrt());
  return {"balancing identity g(t)/g(1/t) = t for the sqrt rule", v <= 1e-12,
          "max relative violation " + fmt(v) + " on t in [1e-6, 1e6]"};
}

CheckResult bound_regression_check() {
  bool ok = true;
  std::ostringstream detail;
  const double b1 = grw_bound({2, 2, 1.0, 1.0, 1.0});
  ok = ok && b1 == 2.0;
  detail << "grw_bound(K=2,d=2,sigma=1,m=L=1) = " << b1;

  const double b2 = grw_sup_bound(3, 3, 1.0, 1.0);
  const double ref = 4.0 * std::exp(1.04) * std::pow(2.0 * std::log(3.0), 2) / 3.0;
  ok = ok && std::abs(b2 - ref) <= 1e-12 * ref;
  detail << "; grw_sup_bound(3,3,1,1) = " << b2 << " vs " << ref;

  bool raised = false;
  try {
    grw_sup_bound(3, 2, 1.0, 1.0);
  } catch (const DomainError&) {
    raised = true;
  }
  bool raised2 = false;
  try {
    grw_sup_bound(2, 3, 1.0, 1.0);
  } catch (const DomainError&) {
    raised2 = true;
  }
  ok = ok && raised && raised2;
  detail << "; domain guards " << (raised && raised2 ? "raised" : "MISSING");
  return {"bound arithmetic regression", ok, detail.str()};
}

CheckResult equivalence_check(const WorkerPool* pool) {
  const DiscreteTarget target = five_state_target();
  const std::vector<NamedSpec> specs = {
      {"mtm-iid-gb-k2",
       {Algorithm::Mtm, ProposalKind::IidGaussian, 2, WeightRule::globally_balanced()}},
      {"mtm-anti-lb-k2",
       {Algorithm::Mtm, ProposalKind::AntitheticGaussian, 2,
        WeightRule::locally_balanced_sqrt()}},
      {"gmh-star-k2", {Algorithm::Gmh, ProposalKind::Star, 2, std::nullopt}},
  };
  const int steps = 1000000;
  const int n = target.size();

  double worst = 0.0;
  std::string worst_name;
  std::vector<double> devs(specs.size() * static_cast<std::size_t>(n), 0.0);
  parallel_for(pool, specs.size() * static_cast<std::size_t>(n), [&](std::size_t task) {
    const std::size_t s = task / static_cast<std::size_t>(n);
    const int a = static_cast<int>(task % static_cast<std::size_t>(n));
    const auto& spec = specs[s].spec;
    const KernelMatrix km = build_exact_kernel(spec, target);
    const DiscreteProposalTable table =
        DiscreteProposalTable::build(spec.kind, spec.num_candidates);
    const long x = target.points[static_cast<std::size_t>(a)];
    std::vector<std::uint64_t> counts(static_cast<std::size_t>(n), 0);
    for (int trial = 0; trial < steps; ++trial) {
      const SubstreamContext rc(4242 + s, static_cast<std::uint64_t>(a),
                                static_cast<std::uint64_t>(trial));
      const long next = discrete_step(spec, target, table, x, rc).next;
      counts[static_cast<std::size_t>(target.index_of(next))] += 1;
    }
    double dev = 0.0;
    for (int b = 0; b < n; ++b)
      dev = std::max(dev, std::abs(static_cast<double>(counts[static_cast<std::size_t>(b)]) /
                                       steps -
                                   km.P(a, b)));
    devs[task] = dev;
  });
  for (std::size_t s = 0; s < specs.size(); ++s)
    for (int a = 0; a < n; ++a) {
      const double dev = devs[s * static_cast<std::size_t>(n) + static_cast<std::size_t>(a)];
      if (dev > worst) {
        worst = dev;
        worst_name = specs[s].name + " from state " + std::to_string(a);
      }
    }
  return {"algorithm/kernel equivalence (1e6 one-step draws per state)", worst <= 0.005,
          "max |frequency - exact| = " + fmt(worst) + " at " + worst_name +
              " (tol 0.005)"};
}

CheckResult mgf_consistency_check(const WorkerPool* pool) {
  const auto target = std::make_shared<GaussianTarget>(1, 1.0);
  bool ok = true;
  std::ostringstream detail;
  double worst_margin = -1e300;
  for (double sigma : {0.5, 1.0, 2.0}) {
    for (int k : {1, 4, 16}) {
      SamplerSpec spec;
      spec.algorithm = Algorithm::Mtm;
      spec.weights = WeightRule::globally_balanced();
      spec.proposal = {ProposalKind::IidGaussian, sigma, k};
      spec.target = target;
      Vector nu(1);
      nu[0] = 1.0;
      const DirichletEstimate est = estimate_dirichlet_term(
          spec, nu, 200000, derive_key(515, static_cast<std::uint64_t>(k),
                                       static_cast<std::uint64_t>(sigma * 4)),
          pool);
      BoundQuery q{k, 1, sigma, 1.0, 1.0};
      q.mgf_point = gaussian_mgf_point(sigma);
      q.mgf_value = kGaussianLogMgfValue;
      const double bound = mgf_gap_bound(q);
      const double margin = est.value - 3.0 * est.stderr_ - bound;
      worst_margin = std::max(worst_margin, margin);
      if (margin > 0) ok = false;
    }
  }
  detail << "max (estimate - 3se - bound) = " << fmt(worst_margin)
         << " over sigma in {0.5,1,2}, K in {1,4,16}";
  return {"MGF bound dominates the Dirichlet-term estimate", ok, detail.str()};
}

}  // namespace

std::vector<CheckResult> quick_checks(const WorkerPool* pool) {
  (void)pool;
  std::vector<CheckResult> out;
  out.push_back(reversibility_check());
  out.push_back(peskun_check_all());
  out.push_back(gap_domination_all());
  out.push_back(conductance_all());
  out.push_back(mh_degeneracy_check());
  out.push_back(geometry_check());
  out.push_back(balancing_check());
  out.push_back(bound_regression_check());
  return out;
}

std::vector<CheckResult> full_checks(const WorkerPool* pool) {
  std::vector<CheckResult> out;
  out.push_back(equivalence_check(pool));
  out.push_back(mgf_consistency_check(pool));
  return out;
}

bool all_pass(const std::vector<CheckResult>& results) {
  for (const auto& r : results)
    if (!r.pass) return false;
  return true;
}

void print_results(const std::vector<CheckResult>& results) {
  for (const auto& r : results)
    std::printf("[%s] %s: %s\n", r.pass ? " ok " : "FAIL", r.name.c_str(),
                r.detail.c_str());
}

}  // namespace mpmcmc
