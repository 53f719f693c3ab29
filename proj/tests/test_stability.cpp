#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "pfr/discretization.hpp"
#include "pfr/error.hpp"
#include "pfr/inverse.hpp"
#include "pfr/log.hpp"
#include "pfr/stability.hpp"

using namespace pfr;

namespace {

struct Quiet {
  Quiet() { log::set_level(log::Level::error); }
} quiet;

// Smallest positive root of x^3 - x^2 + r^2 = 0 by the trigonometric formula.
double cubic_root_oracle(double r) {
  const double q = r * r - 2.0 / 27.0;
  const double arg = std::clamp(-13.5 * q, -1.0, 1.0);
  const double th = std::acos(arg) / 3.0;
  double best = 1.0;
  for (int k = 0; k < 3; ++k) {
    const double x = 1.0 / 3.0 + (2.0 / 3.0) * std::cos(th - 2.0 * std::numbers::pi * k / 3.0);
    if (x > 0.0) best = std::min(best, x);
  }
  return best;
}

DistanceCurve decay_curve(double kappa, double T, int n) {
  DistanceCurve c;
  for (int i = 0; i <= n; ++i) {
    const double t = T * i / n;
    c.times.push_back(t);
    c.d.push_back(std::exp(-kappa * t));
  }
  return c;
}

}  // namespace

TEST_CASE("lambda weights: endpoints, small gamma and the tangent bound") {
  const double T = 2.0;
  for (double g : {1e-3, 0.5, 3.0, 50.0}) {
    const auto a = lambda_weights(0.0, T, g);
    const auto b = lambda_weights(T, T, g);
    CHECK(a.lambda1 == doctest::Approx(0.0));
    CHECK(a.lambda2 == doctest::Approx(0.0));
    CHECK(b.lambda1 == doctest::Approx(1.0));
    CHECK(b.lambda2 == doctest::Approx(1.0));
    for (int i = 0; i <= 20; ++i) {
      const double t = T * i / 20.0;
      const auto w = lambda_weights(t, T, g);
      CHECK(w.tangent <= std::min(w.lambda1, w.lambda2) + 1e-14);
      CHECK(w.lambda2 <= t / T + 1e-14);
      CHECK(w.lambda1 >= t / T - 1e-14);
    }
  }
  for (int i = 0; i <= 10; ++i) {
    const double t = T * i / 10.0;
    const auto w = lambda_weights(t, T, 1e-8);
    CHECK(w.lambda1 == doctest::Approx(t / T).epsilon(1e-6));
    CHECK(w.lambda2 == doctest::Approx(t / T).epsilon(1e-6));
  }
  CHECK_THROWS_AS(lambda_weights(3.0, T, 1.0), InputError);
  CHECK_THROWS_AS(lambda_weights(1.0, T, 0.0), InputError);
  CHECK(std::isfinite(lambda_weights(1.0, 1.0, 2000.0).lambda2));
}

TEST_CASE("beta values") {
  CHECK(beta_of(1.0, 1.0) == doctest::Approx(0.5819767068693265).epsilon(1e-14));
  CHECK(beta_of(1.0, std::log(2.0)) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(beta_of(1e-12, 4.0) == doctest::Approx(0.25).epsilon(1e-9));
}

TEST_CASE("log constants for unit inputs") {
  const auto c = compute_log_constants(1, 1, 1, 1, 1);
  CHECK(c.beta == doctest::Approx(0.5819767068693265).epsilon(1e-14));
  CHECK(c.C2 == doctest::Approx(3.9103763602084562).epsilon(1e-14));
  // min{1, 4 sqrt3 / 9} = 0.7698...
  CHECK(c.eps_threshold == doctest::Approx(std::exp(-9.0 / (4.0 * std::sqrt(3.0)))).epsilon(1e-14));
  CHECK(compute_log_constants(10, 1, 1, 1, 1).eps_threshold == doctest::Approx(std::exp(-1.0)));
  CHECK_THROWS_AS(compute_log_constants(0, 1, 1, 1, 1), InputError);
}

TEST_CASE("x bracket against the closed-form cubic root") {
  std::mt19937_64 rng(11);
  const double r_max = 2.0 * std::sqrt(3.0) / 9.0;
  std::uniform_real_distribution<double> u(1e-6, r_max);
  for (int i = 0; i < 100; ++i) {
    const double r = u(rng);
    const XBracket b = solve_x_bracket(r);
    CHECK(b.x_bar == doctest::Approx(cubic_root_oracle(r)).epsilon(1e-9));
    CHECK(b.x_bar * std::sqrt(1.0 - b.x_bar) == doctest::Approx(r).epsilon(1e-12));
    CHECK(b.x_lower <= b.x_bar);
    CHECK(b.x_bar <= b.x_upper * (1.0 + 1e-12));
    CHECK(b.x_bar <= 2.0 / 3.0);
  }
  CHECK(solve_x_bracket(r_max).x_bar == doctest::Approx(2.0 / 3.0));
  CHECK_THROWS_AS(solve_x_bracket(0.4), InputError);
  CHECK_THROWS_AS(solve_x_bracket(0.0), InputError);
}

TEST_CASE("Lipschitz chain") {
  SUBCASE("all ones, Q2 = 0") {
    const auto c = compute_lipschitz_chain(1, 0, 1, 1, 1, 1, 1);
    CHECK(c.m0 == doctest::Approx(1.0));
    CHECK(c.Cs == doctest::Approx(2.0 * std::exp(16.0)).epsilon(1e-13));
    CHECK(c.log_Cs == doctest::Approx(std::log(2.0) + 16.0).epsilon(1e-14));
    CHECK(c.log_log_Cs == doctest::Approx(std::log(std::log(2.0) + 16.0)).epsilon(1e-14));
    CHECK_FALSE(c.saturated);
  }
  SUBCASE("C0 = 0 keeps the second branch") {
    const auto c = compute_lipschitz_chain(0, 1, 2, 1, 1, 5, 1);
    CHECK(c.m0 == doctest::Approx(2.0 * std::exp(-1.0)));
    CHECK(c.Cs == doctest::Approx(std::max(2.0, 2.0 / c.m0)));
    CHECK_FALSE(c.saturated);
  }
  SUBCASE("huge exponent stays finite in log log") {
    const auto c = compute_lipschitz_chain(10, 5, 1, 3, 1, 100, 1);
    CHECK(c.saturated);
    const double log_m0 = -std::log(3.0) - 25.0;
    CHECK(c.log_log_Cs ==
          doctest::Approx(std::log(16.0 * 100.0 * 100.0) - log_m0).epsilon(1e-12));
  }
  CHECK_THROWS_AS(compute_lipschitz_chain(1, 0, 0, 1, 1, 1, 1), InputError);
}

TEST_CASE("Hoelder fit of a single decaying mode") {
  const double kappa = 3.0, T = 0.5;
  const DistanceCurve c = decay_curve(kappa, T, 50);
  const HolderFit fit = holder_fit(std::vector<DistanceCurve>{c}, 1.0);
  // Both templates tend to t/T as gamma -> 0, which is exact here.
  CHECK(fit.lambda2.C1 == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(fit.C1 == doctest::Approx(1.0).epsilon(1e-4));
  CHECK(fit.violations == 0);
  for (std::size_t i = 0; i < c.times.size(); ++i) {
    CHECK(fit.lambda_emp[i] == doctest::Approx(c.times[i] / T).epsilon(1e-3));
  }
  // lambda1 is concave in t, so it needs C1 > 1 here.
  CHECK(fit.lambda1.C1 > 1.0);
  CHECK_THROWS_AS(holder_fit(std::vector<DistanceCurve>{c}, 0.5), InputError);
  DistanceCurve zero = c;
  zero.d.back() = 0.0;
  CHECK_THROWS_AS(holder_fit(std::vector<DistanceCurve>{zero}, 1.0), InputError);
}

TEST_CASE("Hoelder fit: C1(gamma) oracle and violations") {
  // Two-mode curve: d^2 = 0.5 e^{-2t} + 0.5 e^{-20t}.
  DistanceCurve c;
  const double T = 1.0;
  for (int i = 0; i <= 100; ++i) {
    const double t = T * i / 100.0;
    c.times.push_back(t);
    c.d.push_back(std::sqrt(0.5 * std::exp(-2.0 * t) + 0.5 * std::exp(-20.0 * t)));
  }
  const std::vector<DistanceCurve> curves{c};
  const double M = 1.0;
  for (auto which : {HolderTemplate::lambda1, HolderTemplate::lambda2}) {
    const TemplateFit f = fit_template(curves, M, which);
    // Brute-force C1 over a fine independent gamma scan.
    double brute = INFINITY;
    for (int k = 0; k <= 4000; ++k) {
      const double g = std::exp(std::log(1e-6) + (std::log(200.0) - std::log(1e-6)) * k / 4000.0);
      double worst = 0.0;
      for (std::size_t i = 0; i < c.d.size(); ++i) {
        const auto w = lambda_weights(c.times[i], T, g);
        const double lam = which == HolderTemplate::lambda1 ? w.lambda1 : w.lambda2;
        worst = std::max(worst, c.d[i] / (std::pow(M, 1 - lam) * std::pow(c.d.back(), lam)));
      }
      brute = std::min(brute, worst);
    }
    CHECK(f.C1 <= brute * (1.0 + 1e-9));
    CHECK(f.C1 == doctest::Approx(brute).epsilon(1e-3));
    CHECK(holder_violations(curves, M, f.gamma, f.C1, which) == 0);
    CHECK(holder_violations(curves, M, f.gamma, 0.9 * f.C1, which) > 0);
  }
}

TEST_CASE("log-convexity diagnostic") {
  const double T = 1.0;
  SUBCASE("single mode: l is linear") {
    const auto r = log_convexity_diagnostic(decay_curve(2.0, T, 40));
    CHECK(r.c_min == doctest::Approx(0.0).epsilon(1e-9));
    CHECK(std::abs(r.min_second_diff) < 1e-8);
  }
  SUBCASE("two modes: log-convex sum") {
    std::vector<double> t, q;
    for (int i = 0; i <= 40; ++i) {
      t.push_back(T * i / 40.0);
      q.push_back(0.3 * std::exp(-2.0 * t.back()) + 0.7 * std::exp(-30.0 * t.back()));
    }
    const auto r = log_convexity_diagnostic(t, q);
    CHECK(r.c_min == 0.0);
    CHECK(r.min_second_diff > 0.0);
  }
  SUBCASE("log-concave q = exp(-t^2)") {
    std::vector<double> t, q;
    const double dt = 0.05;
    for (int i = 0; i <= 20; ++i) {
      t.push_back(i * dt);
      q.push_back(std::exp(-t.back() * t.back()));
    }
    const auto r = log_convexity_diagnostic(t, q);
    CHECK(r.c_min == doctest::Approx(2.0 / (2.0 * dt + 1.0)).epsilon(1e-9));
  }
  CHECK_THROWS_AS(log_convexity_diagnostic({0.0, 0.1, 0.3}, {1.0, 1.0, 1.0}), InputError);
  CHECK_THROWS_AS(log_convexity_diagnostic({0.0, 0.1, 0.2}, {1.0, 0.0, 1.0}), InputError);
}

TEST_CASE("H1 time norm of a constant trajectory") {
  const auto g = Grid::unit(2, 8);
  const StateTriple u = StateTriple::constant(g, 0.0, 2.0, 1.0);
  const std::vector<StateTriple> states(11, u);
  CHECK(h1_time_norm(states, 0.1) == doctest::Approx(norm_l2(u)).epsilon(1e-12));
}

TEST_CASE("stability report on a small problem") {
  const ModelParams p;
  const auto g = Grid::unit(2, 8);
  const TimeGrid tg{0.1, 10, 2};
  StabilityConfig cfg;
  cfg.ensemble_size = 4;
  cfg.probe_basis = 2;
  cfg.probe_random = 2;
  cfg.lipschitz_pairs = 1;
  cfg.subspace_modes = 2;
  const StabilityReport r = compute_stability_report(p, g, tg, cfg);
  CHECK(r.holder.violations == 0);
  CHECK(r.M_bound > 0.0);
  CHECK(r.M1_bound > 0.0);
  CHECK(r.C1_fit >= 1.0);
  CHECK(r.linearised.L > 0.0);
  CHECK(r.linearised.Q2 > 0.0);
  CHECK(r.subspace_dim == 12);
  CHECK(r.curve.d.size() == 11);
  CHECK(std::isfinite(r.chain.log_log_Cs));

  cfg.jobs = 2;
  const StabilityReport r2 = compute_stability_report(p, g, tg, cfg);
  CHECK(r2.C1_fit == r.C1_fit);
  CHECK(r2.chain.log_log_Cs == r.chain.log_log_Cs);

  const auto j = to_json(r);
  for (const char* k : {"M_bound", "M1_bound", "gamma_fit", "C1_fit", "log_convexity_c", "C2",
                        "epsilon_threshold", "L", "L1", "Q1", "Q2", "C0", "C_Lambda", "m0",
                        "log_log_C_s"}) {
    CAPTURE(k);
    CHECK(j.contains(k));
  }
  const std::string csv = stability_curves_csv(r);
  CHECK(csv.rfind("t,d,lambda_emp,log_q\n", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 12);
}
