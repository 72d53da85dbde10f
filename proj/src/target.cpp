#include "mpmcmc/target.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "mpmcmc/numeric.hpp"
#include "mpmcmc/rng.hpp"

namespace mpmcmc {

namespace {

std::string format_double(double v) {
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

}  // namespace

GaussianTarget::GaussianTarget(int dim, double variance)
    : dim_(dim), variance_(variance) {
  if (dim <= 0) throw InvalidConfigError("GaussianTarget: dim must be positive");
  if (!(variance > 0)) throw InvalidConfigError("GaussianTarget: variance must be positive");
}

double GaussianTarget::log_density(const Vector& x) const {
  return -0.5 * x.squaredNorm() / variance_;
}

Vector GaussianTarget::grad_log_density(const Vector& x) const {
  return -x / variance_;
}

LogisticData generate_experiment_data(int n, int d, std::uint64_t seed) {
  LogisticData data;
  data.design.resize(n, d);
  for (int i = 0; i < n; ++i) {
    RngStream row(derive_key(seed, static_cast<std::uint64_t>(Purpose::Dataset), i));
    for (int j = 0; j < d; ++j) data.design(i, j) = row.next_gauss();
  }
  RngStream param(derive_key(seed, static_cast<std::uint64_t>(Purpose::DatasetParam)));
  data.theta0.resize(d);
  for (int j = 0; j < d; ++j) data.theta0[j] = 0.5 * param.next_gauss();
  data.responses.resize(n);
  const Vector t = data.design * data.theta0;
  for (int i = 0; i < n; ++i) {
    RngStream resp(derive_key(seed, static_cast<std::uint64_t>(Purpose::DatasetResponse), i));
    data.responses[i] = resp.next_double() < sigmoid(t[i]) ? 1 : 0;
  }
  return data;
}

void write_dataset_csv(const std::string& path, const Matrix& design,
                       const std::vector<std::uint8_t>& responses) {
  if (static_cast<std::size_t>(design.rows()) != responses.size())
    throw InvalidConfigError("dataset csv: rows and responses disagree");
  std::ofstream out(path);
  if (!out) throw Error("cannot open " + path + " for writing");
  for (Eigen::Index i = 0; i < design.rows(); ++i) {
    for (Eigen::Index j = 0; j < design.cols(); ++j)
      out << format_double(design(i, j)) << ',';
    out << int(responses[static_cast<std::size_t>(i)]) << '\n';
  }
}

std::pair<Matrix, std::vector<std::uint8_t>> read_dataset_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path);
  std::vector<std::vector<double>> rows;
  std::vector<std::uint8_t> responses;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<double> vals;
    std::size_t pos = 0;
    while (pos <= line.size()) {
      const std::size_t comma = line.find(',', pos);
      const std::string tok = line.substr(pos, comma == std::string::npos
                                                   ? std::string::npos
                                                   : comma - pos);
      double v = 0;
      auto res = std::from_chars(tok.data(), tok.data() + tok.size(), v);
      if (res.ec != std::errc{}) throw Error("dataset csv: bad number '" + tok + "'");
      vals.push_back(v);
      if (comma == std::string::npos) break;
      pos = comma + 1;
    }
    if (vals.size() < 2) throw Error("dataset csv: row too short");
    const double z = vals.back();
    if (z != 0.0 && z != 1.0) throw Error("dataset csv: response must be 0 or 1");
    responses.push_back(static_cast<std::uint8_t>(z));
    vals.pop_back();
    rows.push_back(std::move(vals));
  }
  if (rows.empty()) throw Error("dataset csv: empty file");
  Matrix design(rows.size(), rows.front().size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != rows.front().size())
      throw Error("dataset csv: ragged rows");
    for (std::size_t j = 0; j < rows[i].size(); ++j)
      design(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
  }
  return {design, responses};
}

double power_iteration_lambda_max(const Matrix& sym, double rel_tol, int max_iters) {
  const Eigen::Index n = sym.rows();
  Vector v = Vector::Ones(n);
  // Break symmetry so an eigenvector orthogonal to ones cannot stall us.
  for (Eigen::Index i = 0; i < n; ++i) v[i] += 1e-3 * static_cast<double>(i + 1) / static_cast<double>(n);
  v.normalize();
  double lambda = 0.0;
  for (int it = 0; it < max_iters; ++it) {
    Vector w = sym * v;
    const double next = v.dot(w);
    const double norm = w.norm();
    if (norm == 0.0) return 0.0;
    v = w / norm;
    if (it > 0 && std::abs(next - lambda) <= rel_tol * std::abs(next)) return next;
    lambda = next;
  }
  return lambda;
}

LogisticRegressionPosterior::LogisticRegressionPosterior(
    Matrix design, std::vector<std::uint8_t> responses, double prior_variance)
    : design_(std::move(design)),
      responses_(std::move(responses)),
      prior_variance_(prior_variance) {
  if (static_cast<std::size_t>(design_.rows()) != responses_.size())
    throw InvalidConfigError("logistic posterior: design rows and responses disagree");
  if (!(prior_variance_ > 0))
    throw InvalidConfigError("logistic posterior: prior variance must be positive");
  m_ = 1.0 / prior_variance_;
  // The Bernoulli Hessian factor p(1-p) is at most 1/4 everywhere, so
  // lambda_max(B^T B)/4 plus the prior precision bounds the curvature.
  const Matrix gram = design_.transpose() * design_;
  l_ = power_iteration_lambda_max(gram) / 4.0 + m_;
}

std::shared_ptr<LogisticRegressionPosterior> LogisticRegressionPosterior::standard(
    Matrix design, std::vector<std::uint8_t> responses) {
  const double d = static_cast<double>(design.cols());
  return std::make_shared<LogisticRegressionPosterior>(std::move(design),
                                                       std::move(responses), 25.0 / d);
}

double LogisticRegressionPosterior::log_density(const Vector& theta) const {
  const Vector t = design_ * theta;
  double ll = 0.0;
  for (Eigen::Index i = 0; i < t.size(); ++i) {
    if (responses_[static_cast<std::size_t>(i)]) ll += t[i];
    ll -= log1p_exp(t[i]);
  }
  return ll - 0.5 * theta.squaredNorm() / prior_variance_;
}

Vector LogisticRegressionPosterior::grad_log_density(const Vector& theta) const {
  const Vector t = design_ * theta;
  Vector resid(t.size());
  for (Eigen::Index i = 0; i < t.size(); ++i)
    resid[i] = static_cast<double>(responses_[static_cast<std::size_t>(i)]) - sigmoid(t[i]);
  return design_.transpose() * resid - theta / prior_variance_;
}

Matrix LogisticRegressionPosterior::hessian_neg_log_density(const Vector& theta) const {
  const Vector t = design_ * theta;
  Vector w(t.size());
  for (Eigen::Index i = 0; i < t.size(); ++i) {
    const double p = sigmoid(t[i]);
    w[i] = p * (1.0 - p);
  }
  Matrix h = design_.transpose() * w.asDiagonal() * design_;
  h.diagonal().array() += 1.0 / prior_variance_;
  return h;
}

Vector LogisticRegressionPosterior::mode() const {
  Vector theta = Vector::Zero(dim());
  for (int it = 0; it < 30; ++it) {
    const Vector g = grad_log_density(theta);
    const Matrix h = hessian_neg_log_density(theta);
    const Vector step = h.ldlt().solve(g);
    theta += step;
    if (step.norm() < 1e-12) break;
  }
  return theta;
}

std::pair<double, double> convexity_constants(const Target& target) {
  const auto m = target.strong_convexity();
  const auto l = target.smoothness();
  if (!m || !l)
    throw CapabilityError("target does not expose convexity constants");
  return {*m, *l};
}

DiscreteTarget::DiscreteTarget(std::vector<long> pts, std::vector<double> lm)
    : points(std::move(pts)), logmass(std::move(lm)) {
  if (points.size() != logmass.size())
    throw InvalidConfigError("DiscreteTarget: points/logmass size mismatch");
  if (points.size() < 2)
    throw InvalidConfigError("DiscreteTarget: need at least 2 states");
  for (double v : logmass)
    if (!std::isfinite(v))
      throw InvalidConfigError("DiscreteTarget: all log masses must be finite");
}

int DiscreteTarget::index_of(long value) const {
  for (std::size_t i = 0; i < points.size(); ++i)
    if (points[i] == value) return static_cast<int>(i);
  return -1;
}

double DiscreteTarget::log_mass(long value) const {
  const int i = index_of(value);
  return i < 0 ? kNegInf : logmass[static_cast<std::size_t>(i)];
}

std::vector<double> DiscreteTarget::stationary() const {
  const double lse = log_sum_exp(std::span<const double>(logmass));
  std::vector<double> p(logmass.size());
  for (std::size_t i = 0; i < p.size(); ++i) p[i] = std::exp(logmass[i] - lse);
  return p;
}

}  // namespace mpmcmc
