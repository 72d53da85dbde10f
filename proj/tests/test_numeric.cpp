#include <doctest.h>

#include <cmath>
#include <vector>

#include "mpmcmc/numeric.hpp"
#include "mpmcmc/rng.hpp"
#include "mpmcmc/types.hpp"

using namespace mpmcmc;

TEST_CASE("log_sum_exp basic values") {
  CHECK(log_sum_exp({0.0, 0.0}) == doctest::Approx(std::log(2.0)).epsilon(1e-15));
  CHECK(log_sum_exp({kNegInf, 0.0}) == doctest::Approx(0.0));
  // shift invariance pins the large-scale value to the small-scale one
  const double small = log_sum_exp({0.0, 0.0});
  CHECK(log_sum_exp({1000.0, 1000.0}) == doctest::Approx(1000.0 + small).epsilon(1e-15));
}

TEST_CASE("log_sum_exp does not overflow") {
  CHECK(std::isfinite(log_sum_exp({700.0, 700.0, 699.0})));
  CHECK(std::isfinite(log_sum_exp({-700.0, -700.0})));
}

TEST_CASE("log_sum_exp rejects all -inf") {
  CHECK_THROWS_AS(log_sum_exp({kNegInf, kNegInf}), DomainError);
  CHECK(!try_log_sum_exp(std::vector<double>{kNegInf, kNegInf}).has_value());
}

TEST_CASE("log_sum_exp shift invariance property") {
  RngStream rng(12345);
  for (int rep = 0; rep < 200; ++rep) {
    std::vector<double> v(5);
    for (auto& x : v) x = 20.0 * (rng.next_double() - 0.5);
    const double c = 100.0 * (rng.next_double() - 0.5);
    std::vector<double> shifted = v;
    for (auto& x : shifted) x += c;
    CHECK(std::abs(log_sum_exp(shifted) - (log_sum_exp(v) + c)) <= 1e-12);
  }
}

TEST_CASE("log1p_exp matches naive evaluation in the stable range") {
  for (double t : {-30.0, -5.0, -0.1, 0.0, 0.1, 5.0, 17.0, 25.0, 40.0}) {
    const double naive = t < 500 ? std::log1p(std::exp(std::min(t, 700.0))) : t;
    CHECK(log1p_exp(t) == doctest::Approx(naive).epsilon(1e-14));
  }
  CHECK(std::isfinite(log1p_exp(5000.0)));
  CHECK(log1p_exp(-5000.0) == 0.0);
}

TEST_CASE("validate_selection accepts valid rules") {
  CHECK(!validate_selection({1.0, {0.0, 0.0}}).has_value());
  CHECK(!validate_selection({0.25, {0.5, 0.25}}).has_value());
}

TEST_CASE("validate_selection reports negativity at stay") {
  const auto v = validate_selection({-0.1, {0.6, 0.5}});
  REQUIRE(v.has_value());
  CHECK(v->index == -1);
}

TEST_CASE("validate_selection reports mass violations") {
  const auto v = validate_selection({0.3, {0.3, 0.3}});
  REQUIRE(v.has_value());
  CHECK(v->index == -2);
}

TEST_CASE("validate_selection throws on NaN") {
  CHECK_THROWS_AS(validate_selection({std::nan(""), {0.5}}), MalformedRuleError);
}

TEST_CASE("categorical draws respect zero-mass entries") {
  const std::vector<double> logw = {kNegInf, 0.0, kNegInf};
  for (double u : {0.0, 0.3, 0.9999}) {
    const auto pick = categorical_from_log(logw, u);
    REQUIRE(pick.has_value());
    CHECK(*pick == 1);
  }
  CHECK(!categorical_from_log(std::vector<double>{kNegInf, kNegInf}, 0.5).has_value());
}

TEST_CASE("compensated sum is exact on an adversarial series") {
  CompensatedSum s;
  s.add(1.0);
  for (int i = 0; i < 10; ++i) s.add(1e-16);
  s.add(-1.0);
  CHECK(s.value() == doctest::Approx(1e-15).epsilon(1e-3));
}
