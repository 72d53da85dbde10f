#include "mpmcmc/proposal.hpp"

#include <cmath>

#include <Eigen/QR>

#include "mpmcmc/numeric.hpp"

namespace mpmcmc {

std::string to_string(ProposalKind kind) {
  switch (kind) {
    case ProposalKind::IidGaussian: return "iid-gaussian";
    case ProposalKind::AntitheticGaussian: return "antithetic-gaussian";
    case ProposalKind::Star: return "star";
    case ProposalKind::Langevin: return "langevin";
    case ProposalKind::Simplicial: return "simplicial";
  }
  return "?";
}

double ProposalFamily::antithetic_cross() const {
  if (kind != ProposalKind::AntitheticGaussian)
    throw CapabilityError("antithetic_cross: not an antithetic family");
  if (num_candidates < 2)
    throw InvalidConfigError("antithetic family requires K >= 2");
  return -step * step / static_cast<double>(num_candidates - 1);
}

void ProposalFamily::validate() const {
  if (num_candidates < 1)
    throw InvalidConfigError("proposal family: K must be >= 1");
  if (step < 0)
    throw InvalidConfigError("proposal family: step must be nonnegative");
  if (kind == ProposalKind::AntitheticGaussian && num_candidates < 2)
    throw InvalidConfigError("antithetic family requires K >= 2");
}

namespace {

Vector gauss_vector(RngStream& rng, int d) {
  Vector v(d);
  int i = 0;
  for (; i + 1 < d; i += 2) rng.next_gauss_pair(v[i], v[i + 1]);
  if (i < d) v[i] = rng.next_gauss();
  return v;
}

}  // namespace

CandidateDraw sample_iid_gaussian(const Vector& x, double sigma, int k,
                                  const SubstreamContext& rc, const WorkerPool* pool) {
  CandidateDraw draw;
  draw.candidates.resize(k);
  parallel_for(pool, static_cast<std::size_t>(k), [&](std::size_t i) {
    RngStream rng = rc.stream(Purpose::Candidates, i);
    draw.candidates[i] = x + sigma * gauss_vector(rng, static_cast<int>(x.size()));
  });
  return draw;
}

CandidateDraw sample_antithetic_gaussian(const Vector& x, double sigma, int k,
                                         const SubstreamContext& rc,
                                         const WorkerPool* pool) {
  if (k < 2) throw InvalidConfigError("antithetic proposal requires K >= 2");
  const int d = static_cast<int>(x.size());
  // iid draws at inflated scale sigma^2 K/(K-1); recentring around the
  // mean produces marginal variance sigma^2 and cross-covariance
  // -sigma^2/(K-1), and makes the K increments sum to zero exactly.
  const double scale = sigma * std::sqrt(static_cast<double>(k) / (k - 1.0));
  std::vector<Vector> eps(static_cast<std::size_t>(k));
  parallel_for(pool, static_cast<std::size_t>(k), [&](std::size_t i) {
    RngStream rng = rc.stream(Purpose::Candidates, i);
    eps[i] = scale * gauss_vector(rng, d);
  });
  Vector mean = Vector::Zero(d);
  for (const auto& e : eps) mean += e;
  mean /= static_cast<double>(k);
  CandidateDraw draw;
  draw.candidates.resize(k);
  for (int i = 0; i < k; ++i)
    draw.candidates[static_cast<std::size_t>(i)] = x + (eps[static_cast<std::size_t>(i)] - mean);
  return draw;
}

CandidateDraw sample_star(const Vector& x, double sigma, int k,
                          const SubstreamContext& rc, const WorkerPool* pool) {
  const int d = static_cast<int>(x.size());
  const double half = sigma / std::sqrt(2.0);
  RngStream zrng = rc.stream(Purpose::Latent);
  CandidateDraw draw;
  draw.latent = x + half * gauss_vector(zrng, d);
  draw.candidates.resize(k);
  parallel_for(pool, static_cast<std::size_t>(k), [&](std::size_t i) {
    RngStream rng = rc.stream(Purpose::Candidates, i);
    draw.candidates[i] = *draw.latent + half * gauss_vector(rng, d);
  });
  return draw;
}

CandidateDraw sample_langevin(const Vector& x, double sigma, int k,
                              const Target& target, EvalBudget& budget,
                              const SubstreamContext& rc, const WorkerPool* pool) {
  if (!target.has_gradient())
    throw CapabilityError("langevin proposal requires a target gradient");
  CandidateDraw draw;
  draw.grad_at_origin = target.grad_log_density(x);
  budget.gradient_evals += 1;
  const Vector drift = x + 0.5 * sigma * sigma * (*draw.grad_at_origin);
  draw.candidates.resize(k);
  parallel_for(pool, static_cast<std::size_t>(k), [&](std::size_t i) {
    RngStream rng = rc.stream(Purpose::Candidates, i);
    draw.candidates[i] = drift + sigma * gauss_vector(rng, static_cast<int>(x.size()));
  });
  return draw;
}

std::vector<Vector> simplex_vertices(int k, int d, double lambda) {
  if (k > d) throw InvalidConfigError("simplicial proposal requires K <= d");
  // v_i = (lambda/sqrt(2)) (e_i + b 1_K) in the first K coordinates, with
  // b = (sqrt(K+1) - 1)/K; then |v_i| = lambda and |v_i - v_j| = lambda.
  const double a = lambda / std::sqrt(2.0);
  const double b = (std::sqrt(static_cast<double>(k) + 1.0) - 1.0) / static_cast<double>(k);
  std::vector<Vector> verts(static_cast<std::size_t>(k));
  for (int i = 0; i < k; ++i) {
    Vector v = Vector::Zero(d);
    for (int j = 0; j < k; ++j) v[j] = a * b;
    v[i] += a;
    verts[static_cast<std::size_t>(i)] = v;
  }
  return verts;
}

Matrix haar_orthogonal(int d, RngStream& rng) {
  Matrix g(d, d);
  for (int j = 0; j < d; ++j) {
    Vector col = gauss_vector(rng, d);
    g.col(j) = col;
  }
  Eigen::HouseholderQR<Matrix> qr(g);
  Matrix q = qr.householderQ();
  const Matrix r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (int j = 0; j < d; ++j)
    if (r(j, j) < 0) q.col(j) = -q.col(j);
  return q;
}

CandidateDraw sample_simplicial(const Vector& x, double lambda, int k,
                                const SubstreamContext& rc, const WorkerPool* pool) {
  const int d = static_cast<int>(x.size());
  if (k > d) throw InvalidConfigError("simplicial proposal requires K <= d");
  RngStream rng = rc.stream(Purpose::Rotation);
  CandidateDraw draw;
  draw.rotation = haar_orthogonal(d, rng);
  const auto verts = simplex_vertices(k, d, lambda);
  draw.candidates.resize(k);
  parallel_for(pool, static_cast<std::size_t>(k), [&](std::size_t i) {
    draw.candidates[i] = x + (*draw.rotation) * verts[i];
  });
  return draw;
}

CandidateDraw sample_candidates(const ProposalFamily& family, const Vector& x,
                                const Target& target, EvalBudget& budget,
                                const SubstreamContext& rc, const WorkerPool* pool) {
  family.validate();
  switch (family.kind) {
    case ProposalKind::IidGaussian:
      return sample_iid_gaussian(x, family.step, family.num_candidates, rc, pool);
    case ProposalKind::AntitheticGaussian:
      return sample_antithetic_gaussian(x, family.step, family.num_candidates, rc, pool);
    case ProposalKind::Star:
      return sample_star(x, family.step, family.num_candidates, rc, pool);
    case ProposalKind::Langevin:
      return sample_langevin(x, family.step, family.num_candidates, target, budget, rc, pool);
    case ProposalKind::Simplicial:
      return sample_simplicial(x, family.step, family.num_candidates, rc, pool);
  }
  throw InvalidConfigError("unknown proposal kind");
}

std::vector<Vector> shadow_conditional(ProposalKind kind, const Vector& x,
                                       const Vector& y_i, double sigma, int k,
                                       const SubstreamContext& rc,
                                       const Vector* langevin_drift_grad,
                                       const WorkerPool* pool) {
  const int d = static_cast<int>(x.size());
  const std::size_t m = static_cast<std::size_t>(k - 1);
  std::vector<Vector> shadows(m);
  switch (kind) {
    case ProposalKind::IidGaussian: {
      // Product kernel: the remaining coordinates are iid N(y_i, sigma^2 I)
      // whatever the conditioned coordinate is.
      parallel_for(pool, m, [&](std::size_t j) {
        RngStream rng = rc.stream(Purpose::Shadows, j);
        shadows[j] = y_i + sigma * gauss_vector(rng, d);
      });
      return shadows;
    }
    case ProposalKind::AntitheticGaussian: {
      if (k < 2) throw InvalidConfigError("antithetic shadows require K >= 2");
      // Conditioning the equicorrelated joint on coordinate i leaves a
      // Gaussian with mean y_i - (x - y_i)/(K-1) and covariance
      // sigma^2 K/(K-1) (I - J/(K-1)) per dimension; realized again by
      // recentred iid draws.
      const Vector cmean = y_i - (x - y_i) / static_cast<double>(k - 1);
      const double scale = sigma * std::sqrt(static_cast<double>(k) / (k - 1.0));
      std::vector<Vector> eps(m);
      parallel_for(pool, m, [&](std::size_t j) {
        RngStream rng = rc.stream(Purpose::Shadows, j);
        eps[j] = scale * gauss_vector(rng, d);
      });
      Vector mean = Vector::Zero(d);
      for (const auto& e : eps) mean += e;
      if (m > 0) mean /= static_cast<double>(m);
      for (std::size_t j = 0; j < m; ++j) shadows[j] = cmean + (eps[j] - mean);
      return shadows;
    }
    case ProposalKind::Star: {
      // Under Q(y_i, .) the latent centre z' has prior N(y_i, sigma^2/2);
      // conditioning on one candidate equal to x gives
      // z' ~ N((y_i + x)/2, sigma^2/4), then shadows iid N(z', sigma^2/2).
      RngStream zrng = rc.stream(Purpose::Latent, 1);
      const Vector zmean = 0.5 * (y_i + x);
      const Vector z = zmean + 0.5 * sigma * gauss_vector(zrng, d);
      const double half = sigma / std::sqrt(2.0);
      parallel_for(pool, m, [&](std::size_t j) {
        RngStream rng = rc.stream(Purpose::Shadows, j);
        shadows[j] = z + half * gauss_vector(rng, d);
      });
      return shadows;
    }
    case ProposalKind::Langevin: {
      if (langevin_drift_grad == nullptr)
        throw CapabilityError("langevin shadows need grad log pi at y_i");
      const Vector drift = y_i + 0.5 * sigma * sigma * (*langevin_drift_grad);
      parallel_for(pool, m, [&](std::size_t j) {
        RngStream rng = rc.stream(Purpose::Shadows, j);
        shadows[j] = drift + sigma * gauss_vector(rng, d);
      });
      return shadows;
    }
    case ProposalKind::Simplicial:
      throw CapabilityError("simplicial kind has no shadow conditional (not required)");
  }
  throw InvalidConfigError("unknown proposal kind");
}

double langevin_log_density(const Vector& from, const Vector& to,
                            const Vector& grad_at_from, double sigma) {
  const Vector mean = from + 0.5 * sigma * sigma * grad_at_from;
  const double d = static_cast<double>(from.size());
  return -0.5 * (to - mean).squaredNorm() / (sigma * sigma) -
         d * std::log(sigma) - 0.5 * d * std::log(2.0 * M_PI);
}

}  // namespace mpmcmc
