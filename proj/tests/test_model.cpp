#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <limits>
#include <numbers>

#include "pfr/error.hpp"
#include "pfr/model.hpp"

using namespace pfr;
using namespace pfr::model;

namespace {

ModelParams unit_params() {
  ModelParams p;
  p.M_pot = 1.0;
  return p;
}

double central(double (*f)(double, const ModelParams&), double s, const ModelParams& p, double h) {
  return (f(s + h, p) - f(s - h, p)) / (2.0 * h);
}

}  // namespace

TEST_CASE("double well F and its derivatives") {
  const ModelParams p = unit_params();
  CHECK(eval_F(0.0, p) == 0.0);
  CHECK(eval_F(1.0, p) == 0.0);
  CHECK(eval_F(0.5, p) == doctest::Approx(0.0625).epsilon(1e-15));
  for (double M : {0.3, 1.0, 7.0}) {
    ModelParams q = p;
    q.M_pot = M;
    for (double s : {0.0, 0.5, 1.0}) CHECK(eval_F1(s, q) == doctest::Approx(0.0).epsilon(1e-15));
  }
}

TEST_CASE("interpolation h and its derivatives") {
  const ModelParams p = unit_params();
  CHECK(eval_h(0.0, p) == 0.0);
  CHECK(eval_h(1.0, p) == 1.0);
  CHECK(eval_h1(0.0, p) == 0.0);
  for (double M : {0.5, 2.0}) {
    ModelParams q = p;
    q.M_pot = M;
    CHECK(eval_h1(1.0, q) == 0.0);
    CHECK(eval_h(1.0, q) == doctest::Approx(M));
  }
}

TEST_CASE("tilting function m") {
  ModelParams p = unit_params();
  CHECK(eval_m(p.sigma_l, p) == doctest::Approx(p.m_ref * (p.rho + p.A_apop) / 2.0));
  CHECK(eval_m(1e12, p) == doctest::Approx(p.m_ref * p.rho).epsilon(1e-10));
  CHECK(eval_m(-1e12, p) == doctest::Approx(p.m_ref * p.A_apop).epsilon(1e-10));

  ModelParams q = p;
  q.m_ref = 1.0;
  q.rho = 1.0;
  q.A_apop = -0.5;
  q.sigma_l = 1.0;
  q.sigma_r = 1.0;
  // 0.25 + (1.5/pi) * atan(1)
  CHECK(eval_m(2.0, q) == doctest::Approx(0.625).epsilon(1e-14));
}

TEST_CASE("tilted potential G") {
  const ModelParams p = unit_params();
  for (double s : {-1.0, 0.0, 0.4, 0.8, 3.0}) {
    CHECK(eval_G(0.0, s, p) == 0.0);
    CHECK(eval_G(1.0, s, p) == doctest::Approx(-eval_m(s, p)));
    CHECK(eval_G_phi(0.0, s, p) == 0.0);
    CHECK(eval_G_phi(1.0, s, p) == doctest::Approx(0.0).epsilon(1e-15));
  }
}

TEST_CASE("double-well condition is strict") {
  ModelParams p = unit_params();
  // m(sigma_l) = m_ref (rho + A)/2
  p.rho = 1.0;
  p.A_apop = 1.0;
  p.m_ref = 1e-12;
  CHECK(check_double_well(0.8, p));
  p.m_ref = 0.4;
  CHECK_FALSE(check_double_well(0.8, p));
  p.m_ref = 1.0 / 3.0;
  CHECK(eval_m(0.8, p) == 1.0 / 3.0);
  CHECK_FALSE(check_double_well(0.8, p));
}

TEST_CASE("non-finite input is rejected") {
  const ModelParams p;
  const double nan = std::numeric_limits<double>::quiet_NaN();
  const double inf = std::numeric_limits<double>::infinity();
  CHECK_THROWS_AS(eval_F(nan, p), InputError);
  CHECK_THROWS_AS(eval_h1(inf, p), InputError);
  CHECK_THROWS_AS(eval_m(nan, p), InputError);
  CHECK_THROWS_AS(eval_G(0.5, nan, p), InputError);
  CHECK_THROWS_AS(check_double_well(inf, p), InputError);
}

TEST_CASE("analytic derivatives agree with central differences") {
  ModelParams p;
  p.M_pot = 1.7;
  const double h = 1e-5;
  for (int i = 0; i < 100; ++i) {
    const double s = -2.0 + 5.0 * (i + 0.5) / 100.0;
    CAPTURE(s);
    auto rel = [](double a, double b) { return std::abs(a - b) / std::max(1e-3, std::abs(b)); };
    CHECK(rel(central(eval_F, s, p, h), eval_F1(s, p)) < 1e-6);
    CHECK(rel(central(eval_F1, s, p, h), eval_F2(s, p)) < 1e-6);
    CHECK(rel(central(eval_h, s, p, h), eval_h1(s, p)) < 1e-6);
    CHECK(rel(central(eval_h1, s, p, h), eval_h2(s, p)) < 1e-6);
    CHECK(rel(central(eval_m, s, p, h), eval_m1(s, p)) < 1e-6);
    CHECK(rel(central(eval_m1, s, p, h), eval_m2(s, p)) < 1e-6);
  }
}

TEST_CASE("m is monotone with range inside [m_ref min(rho,A), m_ref max(rho,A)]") {
  const ModelParams p;
  REQUIRE(p.rho > p.A_apop);
  double prev = -std::numeric_limits<double>::infinity();
  for (int i = 0; i <= 2000; ++i) {
    const double s = -50.0 + 0.05 * i;
    const double m = eval_m(s, p);
    CHECK(m > prev);
    CHECK(m >= p.m_ref * p.A_apop);
    CHECK(m <= p.m_ref * p.rho);
    prev = m;
  }
}

TEST_CASE("G keeps its minima at 0 and 1 when the double-well condition holds") {
  const ModelParams p;
  for (double sigma : {-2.0, 0.0, 0.5, 0.8, 1.2, 5.0}) {
    REQUIRE(check_double_well(sigma, p));
    // G_phi changes sign - to + at 0 and at 1 and nowhere else to the
    // same pattern on [-0.5, 1.5].
    std::vector<double> minima;
    const int n = 20000;
    double prev = eval_G_phi(-0.5, sigma, p);
    for (int i = 1; i <= n; ++i) {
      const double phi = -0.5 + 2.0 * i / n;
      const double g = eval_G_phi(phi, sigma, p);
      if (prev < 0.0 && g >= 0.0) minima.push_back(phi);
      prev = g;
    }
    REQUIRE(minima.size() == 2);
    CHECK(minima[0] == doctest::Approx(0.0).epsilon(2e-4));
    CHECK(minima[1] == doctest::Approx(1.0).epsilon(2e-4));
  }
}

TEST_CASE("parameter validation") {
  ModelParams p;
  CHECK(p.validate().empty());
  CHECK(p.gamma_ch() == p.gamma_c - p.gamma_h);
  CHECK(p.S_ch() == p.S_c - p.S_h);
  CHECK(p.alpha_ch() == p.alpha_c - p.alpha_h);

  ModelParams q = p;
  q.eta = -1.0;
  CHECK_THROWS_AS(q.validate(), InputError);
  q = p;
  q.m_ref = 0.0;
  CHECK_THROWS_AS(q.validate(), InputError);
  q = p;
  q.sigma_r = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(q.validate(), InputError);
  q = p;
  q.A_apop = -0.3;
  CHECK_FALSE(q.validate().empty());
  q = p;
  q.M_pot = 0.0;
  CHECK_FALSE(q.validate().empty());
}

TEST_CASE("parameter JSON round trip and schema errors") {
  ModelParams p;
  p.lambda_phi = 0.0123;
  p.A_apop = -0.7;
  const auto j = to_json(p);
  CHECK(j.contains("lambda"));
  CHECK(j.contains("sigma_r"));
  CHECK(params_from_json(j) == p);

  auto missing = j;
  missing.erase("gamma_p");
  try {
    params_from_json(missing);
    FAIL("expected an error");
  } catch (const InputError& e) {
    CHECK(std::string(e.what()).find("gamma_p") != std::string::npos);
  }
  auto extra = j;
  extra["bogus"] = 1.0;
  CHECK_THROWS_AS(params_from_json(extra), InputError);
}
