#include <doctest.h>

#include <cmath>

#include "mpmcmc/bounds.hpp"
#include "mpmcmc/numeric.hpp"

using namespace mpmcmc;

namespace {

SamplerSpec iid_on_gaussian(double sigma, int k, int dim = 1, double variance = 1.0) {
  SamplerSpec spec;
  spec.algorithm = Algorithm::Mtm;
  spec.weights = WeightRule::globally_balanced();
  spec.proposal = {ProposalKind::IidGaussian, sigma, k};
  spec.target = std::make_shared<GaussianTarget>(dim, variance);
  return spec;
}

}  // namespace

TEST_CASE("grw bound hand values") {
  // m=L=1, d=2, sigma=1, K=2: 2 min(2/2, 0.5 + log 2) = 2
  CHECK(grw_bound({2, 2, 1.0, 1.0, 1.0}) == 2.0);
  // K=1, sigma tiny: the second term vanishes
  CHECK(grw_bound({1, 2, 1e-8, 1.0, 1.0}) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(grw_bound({1, 2, 1e-8, 1.0, 1.0}) == doctest::Approx(2e-16 * 0.5).scale(1e-15));
}

TEST_CASE("grw bound is nonincreasing in dimension") {
  double prev = 1e300;
  for (int d : {1, 2, 5, 10, 50, 200}) {
    const double b = grw_bound({4, d, 0.7, 0.5, 2.0});
    CHECK(b <= prev + 1e-15);
    prev = b;
  }
}

TEST_CASE("grw sup bound hand value and scaling") {
  const double ref = 4.0 * std::exp(1.04) * std::pow(2.0 * std::log(3.0), 2) / 3.0;
  CHECK(grw_sup_bound(3, 3, 1.0, 1.0) == doctest::Approx(ref).epsilon(1e-12));
  CHECK(ref == doctest::Approx(18.21).epsilon(1e-3));
  // linear in L/m
  CHECK(grw_sup_bound(5, 7, 1.0, 3.0) ==
        doctest::Approx(3.0 * grw_sup_bound(5, 7, 1.0, 1.0)).epsilon(1e-12));
  CHECK(grw_sup_bound(5, 7, 0.5, 1.0) ==
        doctest::Approx(2.0 * grw_sup_bound(5, 7, 1.0, 1.0)).epsilon(1e-12));
}

TEST_CASE("grw sup bound domain guards") {
  CHECK_THROWS_AS(grw_sup_bound(3, 2, 1.0, 1.0), DomainError);
  CHECK_THROWS_AS(grw_sup_bound(2, 3, 1.0, 1.0), DomainError);
  CHECK_THROWS_AS(grw_sup_bound(3, 1, 1.0, 1.0), DomainError);
}

TEST_CASE("sup bound dominates the sigma-maximized bound where it applies") {
  for (int k : {3, 4, 8, 16, 64})
    for (int d : {3, 5, 10, 50})
      for (double m : {0.5, 1.0})
        for (double l : {1.0, 4.0}) {
          if (std::log(static_cast<double>(k)) >= d) continue;
          const double sigma_star = maximize_grw_bound_sigma(k, d, m, l);
          const double at_star = grw_bound({k, d, sigma_star, m, l});
          CHECK(at_star <= grw_sup_bound(k, d, m, l) + 1e-9);
        }
}

TEST_CASE("gaussian mgf point gives log MGF one half") {
  // s = (1 - e^{-1})/(2 sigma^2) makes E exp(s Z^2) = (1 - 2 sigma^2 s)^{-1/2}
  // equal to exp(1/2) for Z ~ N(0, sigma^2)
  for (double sigma : {0.5, 1.0, 2.0}) {
    const double s = gaussian_mgf_point(sigma);
    const double log_mgf = -0.5 * std::log(1.0 - 2.0 * sigma * sigma * s);
    CHECK(log_mgf == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(s < 1.0 / (2.0 * sigma * sigma));
  }
}

TEST_CASE("mgf gap bound hand value") {
  BoundQuery q{1, 1, 1.0, 1.0, 1.0};
  q.mgf_point = gaussian_mgf_point(1.0);
  q.mgf_value = kGaussianLogMgfValue;
  // (1/2s)(log 1 + 0.5)/1 = 0.5 / (1 - e^{-1})
  CHECK(mgf_gap_bound(q) == doctest::Approx(0.5 / (1.0 - std::exp(-1.0))).epsilon(1e-12));
  CHECK(mgf_gap_bound(q) == doctest::Approx(0.7910).epsilon(1e-4));
}

TEST_CASE("doubling K adds exactly (log 2)/(2 s Var) to the mgf term") {
  for (int k : {1, 2, 8}) {
    BoundQuery q{k, 3, 0.7, 0.5, 2.0};
    q.mgf_point = gaussian_mgf_point(0.7);
    q.mgf_value = kGaussianLogMgfValue;
    BoundQuery q2 = q;
    q2.k = 2 * k;
    const double var = 1.0 / q.l;
    const double inc = std::log(2.0) / (2.0 * *q.mgf_point * var);
    CHECK(mgf_gap_bound(q2) - mgf_gap_bound(q) == doctest::Approx(inc).epsilon(1e-12));
  }
}

TEST_CASE("mgf bound honours the full min when an acceptance floor is given") {
  BoundQuery q{4, 1, 1.0, 1.0, 1.0};
  q.mgf_point = gaussian_mgf_point(1.0);
  q.mgf_value = kGaussianLogMgfValue;
  const double second = mgf_gap_bound(q);
  CHECK(mgf_gap_bound(q, 1e-6) == doctest::Approx(8e-6).epsilon(1e-12));
  CHECK(mgf_gap_bound(q, 1.0) == doctest::Approx(second).epsilon(1e-12));
}

TEST_CASE("mgf bound rejects s outside the gaussian domain") {
  BoundQuery q{2, 1, 1.0, 1.0, 1.0};
  q.mgf_point = 0.51;  // 1/(2 sigma^2) = 0.5
  q.mgf_value = 0.5;
  CHECK_THROWS_AS(mgf_gap_bound(q), DomainError);
}

TEST_CASE("dirichlet term estimate: unit case") {
  Vector nu(1);
  nu[0] = 1.0;
  const DirichletEstimate est =
      estimate_dirichlet_term(iid_on_gaussian(1.0, 1), nu, 200000, 33);
  // E (Y - X)^2 = sigma^2 = 1, Var(X) = 1: the ratio is 1/2
  CHECK(std::abs(est.value - 0.5) <= 3.0 * est.stderr_ + 0.01);
  CHECK(est.stderr_ > 0.0);
  CHECK(est.var_nu == doctest::Approx(1.0).epsilon(0.05));
}

TEST_CASE("dirichlet term estimate vanishes at zero step") {
  Vector nu(1);
  nu[0] = 1.0;
  const DirichletEstimate est =
      estimate_dirichlet_term(iid_on_gaussian(0.0, 4), nu, 20000, 34);
  CHECK(est.value == 0.0);
}

TEST_CASE("dirichlet term estimate is monotone in K") {
  Vector nu(1);
  nu[0] = 1.0;
  double prev = -1.0;
  for (int k : {1, 2, 4, 8}) {
    const DirichletEstimate est =
        estimate_dirichlet_term(iid_on_gaussian(1.0, k), nu, 150000, 35);
    CHECK(est.value >= prev - 3.0 * est.stderr_);
    prev = est.value;
  }
}

TEST_CASE("dirichlet term estimate stays under the mgf bound") {
  Vector nu(1);
  nu[0] = 1.0;
  for (double sigma : {0.5, 2.0}) {
    for (int k : {1, 4, 16}) {
      const DirichletEstimate est =
          estimate_dirichlet_term(iid_on_gaussian(sigma, k), nu, 150000, 36);
      BoundQuery q{k, 1, sigma, 1.0, 1.0};
      q.mgf_point = gaussian_mgf_point(sigma);
      q.mgf_value = kGaussianLogMgfValue;
      CHECK(est.value - 3.0 * est.stderr_ <= mgf_gap_bound(q));
    }
  }
}

TEST_CASE("dirichlet term estimator is deterministic given the seed") {
  Vector nu(1);
  nu[0] = 1.0;
  const WorkerPool pool(3);
  const DirichletEstimate a =
      estimate_dirichlet_term(iid_on_gaussian(1.0, 4), nu, 50000, 37);
  const DirichletEstimate b =
      estimate_dirichlet_term(iid_on_gaussian(1.0, 4), nu, 50000, 37, &pool);
  CHECK(a.value == b.value);
  CHECK(a.stderr_ == b.stderr_);
}

TEST_CASE("dirichlet term estimator works off a chain for non-gaussian targets") {
  SamplerSpec spec;
  spec.algorithm = Algorithm::Mtm;
  spec.weights = WeightRule::globally_balanced();
  spec.proposal = {ProposalKind::IidGaussian, 1.0, 2};
  const LogisticData data = generate_experiment_data(10, 2, 3);
  spec.target = LogisticRegressionPosterior::standard(data.design, data.responses);
  Vector nu(2);
  nu << 1.0, 0.0;
  const DirichletEstimate est = estimate_dirichlet_term(spec, nu, 5000, 38);
  CHECK(est.value > 0.0);
  CHECK(std::isfinite(est.stderr_));
}

TEST_CASE("bound query validation") {
  CHECK_THROWS_AS(grw_bound({0, 2, 1.0, 1.0, 1.0}), InvalidConfigError);
  CHECK_THROWS_AS(grw_bound({2, 2, 1.0, 2.0, 1.0}), InvalidConfigError);  // m > L
  BoundQuery q{2, 2, 1.0, 1.0, 1.0};
  Vector bad(2);
  bad << 1.0, 1.0;
  q.direction = bad;
  CHECK_THROWS_AS(q.validate(), InvalidConfigError);
}
