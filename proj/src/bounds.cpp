#include "mpmcmc/bounds.hpp"

#include <cmath>

#include "mpmcmc/numeric.hpp"

namespace mpmcmc {

void BoundQuery::validate() const {
  if (k < 1) throw InvalidConfigError("bound query: K must be >= 1");
  if (d < 1) throw InvalidConfigError("bound query: d must be >= 1");
  if (!(sigma >= 0)) throw InvalidConfigError("bound query: sigma must be >= 0");
  if (!(m > 0) || !(l > 0) || m > l + 1e-12)
    throw InvalidConfigError("bound query: need 0 < m <= L");
  if (direction && std::abs(direction->norm() - 1.0) > 1e-9)
    throw InvalidConfigError("bound query: direction must be a unit vector");
}

double grw_bound(const BoundQuery& q) {
  q.validate();
  const double first = static_cast<double>(q.k) /
                       std::pow(1.0 + q.m * q.sigma * q.sigma, 0.5 * q.d);
  const double second =
      q.sigma * q.sigma * q.l * (0.5 + std::log(static_cast<double>(q.k)));
  return 2.0 * std::min(first, second);
}

double grw_sup_bound(int k, int d, double m, double l) {
  if (d <= 2) throw DomainError("grw_sup_bound: requires d > 2");
  if (k <= 2) throw DomainError("grw_sup_bound: requires K > 2");
  if (!(m > 0) || !(l > 0)) throw InvalidConfigError("grw_sup_bound: need m, L > 0");
  const double c = 4.0 * std::exp(1.04);
  const double lg = std::log(static_cast<double>(k)) + std::log(static_cast<double>(d));
  return c * (l / m) * lg * lg / static_cast<double>(d);
}

double gaussian_mgf_point(double sigma) {
  if (!(sigma > 0)) throw DomainError("gaussian_mgf_point: sigma must be positive");
  return (1.0 - std::exp(-1.0)) / (2.0 * sigma * sigma);
}

double mgf_gap_bound(const BoundQuery& q, std::optional<double> essinf_accept) {
  q.validate();
  if (!q.mgf_point || !q.mgf_value)
    throw InvalidConfigError("mgf_gap_bound: mgf point and value are required");
  const double s = *q.mgf_point;
  if (!(s > 0)) throw DomainError("mgf_gap_bound: s must be positive");
  if (q.sigma > 0 && s >= 1.0 / (2.0 * q.sigma * q.sigma))
    throw DomainError("mgf_gap_bound: s outside the Gaussian MGF domain");
  const double var = q.var_lower ? *q.var_lower : 1.0 / q.l;
  if (!(var > 0)) throw DegenerateError("mgf_gap_bound: need a positive variance bound");
  const double second =
      (std::log(static_cast<double>(q.k)) + *q.mgf_value) / (2.0 * s * var);
  if (!essinf_accept) return second;
  return std::min(2.0 * static_cast<double>(q.k) * (*essinf_accept), second);
}

DirichletEstimate estimate_dirichlet_term(const SamplerSpec& spec, const Vector& nu,
                                          int samples, std::uint64_t seed,
                                          const WorkerPool* pool) {
  spec.validate();
  if (std::abs(nu.norm() - 1.0) > 1e-9)
    throw InvalidConfigError("estimate_dirichlet_term: nu must be a unit vector");
  const int d = spec.target->dim();

  const auto* gaussian = dynamic_cast<const GaussianTarget*>(spec.target.get());
  std::vector<Vector> xs(static_cast<std::size_t>(samples));
  if (gaussian != nullptr) {
    const double sd = std::sqrt(gaussian->variance());
    parallel_for(pool, xs.size(), [&](std::size_t i) {
      RngStream rng(derive_key(seed, static_cast<std::uint64_t>(Purpose::Generic), i));
      Vector x(d);
      for (int j = 0; j < d; ++j) x[j] = sd * rng.next_gauss();
      xs[i] = x;
    });
  } else {
    // Long baseline chain, thinned to the requested sample count.
    const SamplerSpec base = mh_baseline_mixture(spec);
    const int thin = 10;
    const int burn = 2000;
    const ChainTrace trace = run_chain(base, Vector::Zero(d),
                                       burn + thin * samples, derive_key(seed, 17));
    for (int i = 0; i < samples; ++i)
      xs[static_cast<std::size_t>(i)] =
          trace.states[static_cast<std::size_t>(burn + thin * (i + 1))];
  }

  std::vector<double> proj(xs.size());
  std::vector<double> maxsq(xs.size());
  EvalBudget scratch;
  parallel_for(pool, xs.size(), [&](std::size_t i) {
    proj[i] = nu.dot(xs[i]);
    EvalBudget local;
    const SubstreamContext rc(derive_key(seed, 23), 1, i);
    const CandidateDraw draw =
        sample_candidates(spec.proposal, xs[i], *spec.target, local, rc);
    double m = 0.0;
    for (const auto& y : draw.candidates) {
      const double v = nu.dot(y - xs[i]);
      m = std::max(m, v * v);
    }
    maxsq[i] = m;
  });
  (void)scratch;

  double mean_proj = 0.0, mean_max = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    mean_proj += proj[i];
    mean_max += maxsq[i];
  }
  mean_proj /= static_cast<double>(samples);
  mean_max /= static_cast<double>(samples);
  double var_proj = 0.0, var_max = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    var_proj += (proj[i] - mean_proj) * (proj[i] - mean_proj);
    var_max += (maxsq[i] - mean_max) * (maxsq[i] - mean_max);
  }
  var_proj /= static_cast<double>(samples - 1);
  var_max /= static_cast<double>(samples - 1);

  if (!(var_proj > 0))
    throw DegenerateError("estimate_dirichlet_term: direction has zero variance");

  DirichletEstimate out;
  out.var_nu = var_proj;
  out.value = mean_max / (2.0 * var_proj);
  out.stderr_ = std::sqrt(var_max / static_cast<double>(samples)) / (2.0 * var_proj);
  return out;
}

double maximize_grw_bound_sigma(int k, int d, double m, double l, double lo,
                                double hi, int iters) {
  const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
  auto f = [&](double sigma) {
    BoundQuery q{k, d, sigma, m, l};
    return grw_bound(q);
  };
  // Golden-section on log sigma.
  double a = std::log(lo), b = std::log(hi);
  double c = b - gr * (b - a);
  double e = a + gr * (b - a);
  double fc = f(std::exp(c)), fe = f(std::exp(e));
  for (int it = 0; it < iters && b - a > 1e-12; ++it) {
    if (fc > fe) {
      b = e;
      e = c;
      fe = fc;
      c = b - gr * (b - a);
      fc = f(std::exp(c));
    } else {
      a = c;
      c = e;
      fc = fe;
      e = a + gr * (b - a);
      fe = f(std::exp(e));
    }
  }
  return std::exp(0.5 * (a + b));
}

}  // namespace mpmcmc
