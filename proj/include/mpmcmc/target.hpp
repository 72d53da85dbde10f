#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "mpmcmc/types.hpp"

namespace mpmcmc {

/// Unnormalized target distribution on R^d. log_density is log pi up to
/// an additive constant; it returns -inf outside the support and is never
/// +inf or NaN on finite input. Immutable after construction and safe to
/// share across threads.
class Target {
 public:
  virtual ~Target() = default;

  virtual int dim() const = 0;
  virtual double log_density(const Vector& x) const = 0;

  virtual bool has_gradient() const { return false; }
  virtual Vector grad_log_density(const Vector&) const {
    throw CapabilityError("target does not provide gradients");
  }

  /// Strong convexity constant m of U = -log pi, when known.
  virtual std::optional<double> strong_convexity() const { return std::nullopt; }
  /// Smoothness constant L of U, when known. When both are known, m <= L.
  virtual std::optional<double> smoothness() const { return std::nullopt; }
};

using TargetPtr = std::shared_ptr<const Target>;

/// Isotropic Gaussian N(0, variance * I_d).
class GaussianTarget final : public Target {
 public:
  GaussianTarget(int dim, double variance);

  int dim() const override { return dim_; }
  double log_density(const Vector& x) const override;
  bool has_gradient() const override { return true; }
  Vector grad_log_density(const Vector& x) const override;
  std::optional<double> strong_convexity() const override { return 1.0 / variance_; }
  std::optional<double> smoothness() const override { return 1.0 / variance_; }

  double variance() const { return variance_; }

 private:
  int dim_;
  double variance_;
};

/// Synthetic draw of a logistic-regression dataset: covariate rows are
/// standard Gaussian, the generating coefficient vector is N(0, I/4), and
/// responses come from the Bernoulli likelihood at that coefficient.
struct LogisticData {
  Matrix design;                // n x d
  std::vector<std::uint8_t> responses;  // n entries in {0,1}
  Vector theta0;                // generating parameter
};

LogisticData generate_experiment_data(int n, int d, std::uint64_t seed);

void write_dataset_csv(const std::string& path, const Matrix& design,
                       const std::vector<std::uint8_t>& responses);
std::pair<Matrix, std::vector<std::uint8_t>> read_dataset_csv(const std::string& path);

/// Bayesian logistic-regression posterior with N(0, prior_variance * I_d)
/// prior. Convexity constants are cached at construction:
/// m = 1/prior_variance and L = lambda_max(B^T B)/4 + 1/prior_variance.
class LogisticRegressionPosterior final : public Target {
 public:
  LogisticRegressionPosterior(Matrix design, std::vector<std::uint8_t> responses,
                              double prior_variance);

  /// Prior variance 25/d, matching the benchmark model.
  static std::shared_ptr<LogisticRegressionPosterior> standard(
      Matrix design, std::vector<std::uint8_t> responses);

  int dim() const override { return static_cast<int>(design_.cols()); }
  double log_density(const Vector& theta) const override;
  bool has_gradient() const override { return true; }
  Vector grad_log_density(const Vector& theta) const override;
  std::optional<double> strong_convexity() const override { return m_; }
  std::optional<double> smoothness() const override { return l_; }

  const Matrix& design() const { return design_; }
  const std::vector<std::uint8_t>& responses() const { return responses_; }
  double prior_variance() const { return prior_variance_; }

  /// Hessian of U = -log pi at theta (exact; used by validation suites).
  Matrix hessian_neg_log_density(const Vector& theta) const;

  /// Posterior mode by Newton ascent with a fixed deterministic schedule.
  Vector mode() const;

 private:
  Matrix design_;
  std::vector<std::uint8_t> responses_;
  double prior_variance_;
  double m_;
  double l_;
};

/// (m, L) for targets that expose them; CapabilityError otherwise.
std::pair<double, double> convexity_constants(const Target& target);

/// Largest eigenvalue of a symmetric PSD matrix by power iteration.
double power_iteration_lambda_max(const Matrix& sym, double rel_tol = 1e-8,
                                  int max_iters = 10000);

/// Finite target over 1-d integer states; the brute-force substrate for
/// exact kernel analysis. log mass is unnormalized.
struct DiscreteTarget {
  std::vector<long> points;
  std::vector<double> logmass;

  DiscreteTarget(std::vector<long> pts, std::vector<double> lm);

  int size() const { return static_cast<int>(points.size()); }
  /// Index of a point value, or -1 when outside the support.
  int index_of(long value) const;
  /// log mass of a value; -inf outside the support.
  double log_mass(long value) const;
  /// Normalized stationary probabilities.
  std::vector<double> stationary() const;
};

}  // namespace mpmcmc
