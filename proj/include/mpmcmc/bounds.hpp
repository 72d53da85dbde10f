#pragma once

#include <optional>

#include "mpmcmc/sampler.hpp"
#include "mpmcmc/types.hpp"

namespace mpmcmc {

/// Inputs for the closed-form gap bounds: proposal count K, dimension d,
/// step sigma, convexity constants (m, L), and optionally a unit direction
/// with a moment-generating-function evaluation point/value.
struct BoundQuery {
  int k = 1;
  int d = 1;
  double sigma = 1.0;
  double m = 1.0;
  double l = 1.0;
  std::optional<Vector> direction;
  std::optional<double> mgf_point;   // s
  std::optional<double> mgf_value;   // log M^nu(s)
  std::optional<double> var_lower;   // lower bound on Var(nu^T X); 1/L default

  BoundQuery() = default;
  BoundQuery(int k_, int d_, double sigma_, double m_, double l_)
      : k(k_), d(d_), sigma(sigma_), m(m_), l(l_) {}

  void validate() const;
};

/// Gap bound for Gaussian random-walk multiproposal schemes on m-convex,
/// L-smooth targets:
///   2 min( K / (1 + m sigma^2)^{d/2}, sigma^2 L (1/2 + log K) ).
double grw_bound(const BoundQuery& q);

/// Step-size-free version, valid for d, K > 2:
///   4 exp(1.04) (L/m) (log K + log d)^2 / d.
double grw_sup_bound(int k, int d, double m, double l);

/// The MGF term (1/2s)(log K + log M(s)) / Var, and the full min when a
/// lower bound on the baseline leaving probability is supplied.
double mgf_gap_bound(const BoundQuery& q,
                     std::optional<double> essinf_accept = std::nullopt);

/// The evaluation point s = (1 - e^{-1}) / (2 sigma^2) at which a N(0,
/// sigma^2) increment has log MGF of its square equal to exactly 1/2.
double gaussian_mgf_point(double sigma);
constexpr double kGaussianLogMgfValue = 0.5;

struct DirichletEstimate {
  double value = 0.0;
  double stderr_ = 0.0;
  double var_nu = 0.0;
};

/// Monte Carlo estimate of E(max_i (nu^T (Y_i - X))^2) / (2 Var(nu^T X))
/// with X ~ pi drawn exactly for Gaussian targets and from a long MH
/// baseline chain otherwise.
DirichletEstimate estimate_dirichlet_term(const SamplerSpec& spec, const Vector& nu,
                                          int samples, std::uint64_t seed,
                                          const WorkerPool* pool = nullptr);

/// argmax of grw_bound over sigma by golden-section search (the bound is
/// unimodal: a min of a decreasing and an increasing function of sigma).
double maximize_grw_bound_sigma(int k, int d, double m, double l,
                                double lo = 1e-6, double hi = 1e3,
                                int iters = 200);

}  // namespace mpmcmc
