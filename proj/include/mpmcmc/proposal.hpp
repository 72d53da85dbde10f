#pragma once

#include <optional>
#include <string>
#include <vector>

#include "mpmcmc/parallel.hpp"
#include "mpmcmc/rng.hpp"
#include "mpmcmc/target.hpp"
#include "mpmcmc/types.hpp"

namespace mpmcmc {

enum class ProposalKind {
  IidGaussian,
  AntitheticGaussian,
  Star,
  Langevin,
  Simplicial,
};

std::string to_string(ProposalKind kind);

/// The joint proposal kernel Q from the current point to K candidates.
/// `step` is sigma for the Gaussian kinds and the simplex side/radius for
/// the simplicial kind.
struct ProposalFamily {
  ProposalKind kind = ProposalKind::IidGaussian;
  double step = 1.0;
  int num_candidates = 1;

  /// Cross-covariance scale -sigma^2/(K-1) of the antithetic joint.
  double antithetic_cross() const;

  /// Symmetric kinds have Q_i(x, y) = Q_i(y, x), so the marginal ratio in
  /// acceptance probabilities is 1.
  bool symmetric_marginal() const { return kind != ProposalKind::Langevin; }

  /// Kinds whose joint density satisfies q(y_i, (x, y_{-i})) = q(x, y_{1:K});
  /// the simplified pi-ratio selection rule is valid only for these.
  bool exchangeable() const {
    return kind == ProposalKind::Star || kind == ProposalKind::Simplicial;
  }

  void validate() const;
};

/// One joint draw of K candidates, plus whatever auxiliary structure the
/// kind carries (latent centre for star, rotation for simplicial, the
/// origin gradient for Langevin so reverse densities can reuse it).
struct CandidateDraw {
  std::vector<Vector> candidates;
  std::optional<Vector> latent;
  std::optional<Matrix> rotation;
  std::optional<Vector> grad_at_origin;
};

CandidateDraw sample_iid_gaussian(const Vector& x, double sigma, int k,
                                  const SubstreamContext& rc,
                                  const WorkerPool* pool = nullptr);

/// Jointly Gaussian candidates with pairwise increment correlation
/// -1/(K-1): inflated iid draws recentred around their mean.
CandidateDraw sample_antithetic_gaussian(const Vector& x, double sigma, int k,
                                         const SubstreamContext& rc,
                                         const WorkerPool* pool = nullptr);

/// Latent centre z ~ N(x, sigma^2/2 I), candidates iid N(z, sigma^2/2 I).
CandidateDraw sample_star(const Vector& x, double sigma, int k,
                          const SubstreamContext& rc,
                          const WorkerPool* pool = nullptr);

/// K iid draws from N(x + sigma^2/2 grad log pi(x), sigma^2 I). Exactly one
/// gradient evaluation is charged per call, whatever K is.
CandidateDraw sample_langevin(const Vector& x, double sigma, int k,
                              const Target& target, EvalBudget& budget,
                              const SubstreamContext& rc,
                              const WorkerPool* pool = nullptr);

/// Candidates are the non-current vertices of a Haar-rotated regular
/// simplex anchored at x: |y_i - x| = |y_i - y_j| = lambda. Requires K <= d.
CandidateDraw sample_simplicial(const Vector& x, double lambda, int k,
                                const SubstreamContext& rc,
                                const WorkerPool* pool = nullptr);

CandidateDraw sample_candidates(const ProposalFamily& family, const Vector& x,
                                const Target& target, EvalBudget& budget,
                                const SubstreamContext& rc,
                                const WorkerPool* pool = nullptr);

/// Exact draw of the K-1 shadow points: the conditional law of Y_{-i}
/// given Y_i = x under Q(y_i, .). For the Langevin kind the drift gradient
/// at y_i is charged to the budget (and is the same gradient the reverse
/// density needs, so callers should reuse it via `langevin_drift_grad`).
std::vector<Vector> shadow_conditional(ProposalKind kind, const Vector& x,
                                       const Vector& y_i, double sigma, int k,
                                       const SubstreamContext& rc,
                                       const Vector* langevin_drift_grad = nullptr,
                                       const WorkerPool* pool = nullptr);

/// log of the marginal Langevin density q_i(from, to) given the gradient
/// of log pi at `from`, including the Gaussian normalizing constant.
double langevin_log_density(const Vector& from, const Vector& to,
                            const Vector& grad_at_from, double sigma);

/// Fixed regular-simplex vertices in the first K coordinates of R^d,
/// scaled so that |v_i| = |v_i - v_j| = lambda.
std::vector<Vector> simplex_vertices(int k, int d, double lambda);

/// Haar-distributed orthogonal d x d matrix (Gaussian QR with the sign of
/// the triangular factor's diagonal corrected).
Matrix haar_orthogonal(int d, RngStream& rng);

}  // namespace mpmcmc
