#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numbers>

#include "pfr/discretization.hpp"
#include "pfr/error.hpp"
#include "pfr/inverse.hpp"
#include "pfr/log.hpp"

using namespace pfr;

namespace {

struct Quiet {
  Quiet() { log::set_level(log::Level::error); }
} quiet;

ModelParams decoupled() {
  ModelParams p;
  p.M_pot = 0.0;
  p.gamma_c = p.gamma_h;
  p.S_c = p.S_h;
  p.alpha_c = p.alpha_h;
  return p;
}

}  // namespace

TEST_CASE("phantoms are deterministic, admissible and seed dependent") {
  const auto g = Grid::unit(2, 24);
  for (auto kind : {PhantomKind::gaussian_bump, PhantomKind::two_foci, PhantomKind::annulus}) {
    CAPTURE(to_string(kind));
    CHECK(phantom_kind_from_string(to_string(kind)) == kind);
    const StateTriple a = make_phantom(g, kind, 7);
    CHECK(a == make_phantom(g, kind, 7));
    CHECK_FALSE(a == make_phantom(g, kind, 8));
    CHECK(is_admissible(a, {}, 0.0));
    CHECK(a.phi.max() > 0.5);
    CHECK(a.sigma.min() > 0.0);
    CHECK(a.psa.min() > 0.0);
  }
  CHECK_THROWS_AS(phantom_kind_from_string("square"), InputError);
}

TEST_CASE("phantom nutrient is the steady profile") {
  const ModelParams p;
  const auto g = Grid::unit(2, 24);
  const StateTriple s = make_phantom(g, PhantomKind::gaussian_bump, 3);
  // (gamma_h + gamma_ch phi) sigma - eta Lap sigma = S_h + S_ch phi
  const Field lap = laplacian_neumann(s.sigma);
  double worst = 0.0;
  for (std::size_t k = 0; k < g->size(); ++k) {
    const double lhs = (p.gamma_h + p.gamma_ch() * s.phi[k]) * s.sigma[k] - p.eta * lap[k];
    worst = std::max(worst, std::abs(lhs - (p.S_h + p.S_ch() * s.phi[k])));
  }
  CHECK(worst < 1e-8);
}

TEST_CASE("noise level matches the requested ratio") {
  const auto g = Grid::unit(2, 64);
  const StateTriple v = make_phantom(g, PhantomKind::two_foci, 1);
  CHECK(add_noise(v, 0.0, 5) == v);
  const double level = 0.02;
  const StateTriple n = add_noise(v, level, 5);
  CHECK(n == add_noise(v, level, 5));
  CHECK(is_admissible(n, {}, 0.0));
  // Unit square, so the L2 norm of the noise is close to its standard deviation.
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const StateTriple m = add_noise(v, level, seed);
    const double rs = norm_l2(m.sigma - v.sigma) / (level * v.sigma.max_abs());
    const double rp = norm_l2(m.psa - v.psa) / (level * v.psa.max_abs());
    CHECK(rs == doctest::Approx(1.0).epsilon(0.1));
    CHECK(rp == doctest::Approx(1.0).epsilon(0.1));
  }
}

TEST_CASE("discrepancy principle") {
  CHECK(discrepancy_stop(1.0, 1.0, 1.1));
  CHECK(discrepancy_stop(1.1, 1.0, 1.1));
  CHECK_FALSE(discrepancy_stop(1.2, 1.0, 1.1));
  CHECK(discrepancy_stop(0.0, 0.0, 1.1));
  CHECK_FALSE(discrepancy_stop(1e-9, 0.0, 1.1));
}

TEST_CASE("configuration validation") {
  ReconstructionConfig c;
  CHECK_NOTHROW(c.validate());
  c.tau = -1.0;
  CHECK_THROWS_AS(c.validate(), InputError);
  c = {};
  c.tau_dp = 0.5;
  CHECK_THROWS_AS(c.validate(), InputError);
  c = {};
  c.initial_guess = InitialGuess::given;
  CHECK_THROWS_AS(c.validate(), InputError);

  const auto g2 = Grid::unit(2, 8);
  CHECK(subspace_modes_per_axis(*g2, 12) == 2);
  CHECK(subspace_modes_per_axis(*g2, 27) == 3);
  CHECK_THROWS_AS(subspace_modes_per_axis(*g2, 10), InputError);
  CHECK_THROWS_AS(subspace_modes_per_axis(*g2, 6), InputError);
  CHECK(subspace_modes_per_axis(*Grid::unit(1, 8), 6) == 2);
}

TEST_CASE("starting at the truth stops at iteration zero") {
  const ModelParams p;
  const auto g = Grid::unit(2, 12);
  const TimeGrid tg{0.1, 10, 2};
  const StateTriple x = make_phantom(g, PhantomKind::gaussian_bump, 2);
  const StateTriple y = solution_operator_R(x, p, tg);
  ReconstructionConfig c;
  c.initial_guess = InitialGuess::given;
  c.initial = x;
  c.delta = 1e-12;
  const auto r = landweber_reconstruct(y, p, tg, c, &x);
  CHECK(r.iterations == 0);
  CHECK(r.stop == StopReason::discrepancy);
  CHECK(r.estimate == x);
  CHECK(*r.final_error == 0.0);
}

TEST_CASE("linear spectral oracle: error contracts by |1 - tau mu^2| per sweep") {
  // Decoupled model with M = 0 is affine; a Dirichlet sine mode in phi is an
  // eigenvector of the linearisation with eigenvalue (1 + dt lambda k)^{-N}.
  const ModelParams p = decoupled();
  const std::size_t n = 16;
  const auto g = Grid::unit(2, n);
  const TimeGrid tg{0.2, 20, 2};
  const double h = 1.0 / n;
  const double k_eig = 2.0 * 4.0 / (h * h) * std::pow(std::sin(std::numbers::pi * h / 2.0), 2);
  const double mu = std::pow(1.0 + tg.dt() * p.lambda_phi * k_eig, -static_cast<double>(tg.n_steps));

  const StateTriple truth = healthy_state(g, p);
  const StateTriple y = solution_operator_R(truth, p, tg);
  StateTriple x0 = truth;
  x0.phi = Field::from_function(g, [](double x, double yy) {
    return 0.3 * std::sin(std::numbers::pi * x) * std::sin(std::numbers::pi * yy);
  });
  const double e0 = norm_l2(x0 - truth);

  ReconstructionConfig c;
  c.initial_guess = InitialGuess::given;
  c.initial = x0;
  c.enforce_admissible = false;
  c.tau = 0.5;
  c.max_iter = 6;
  c.stagnation_window = 100;
  c.cg.rel_tol = 1e-14;
  const auto r = landweber_reconstruct(y, p, tg, c);
  REQUIRE(r.residuals.size() == 7);
  const double factor = std::abs(1.0 - 0.5 * mu * mu);
  for (std::size_t k = 0; k < r.residuals.size(); ++k) {
    CAPTURE(k);
    CHECK(r.residuals[k] == doctest::Approx(mu * std::pow(factor, k) * e0).epsilon(1e-7));
  }
  CHECK(norm_l2(r.estimate - truth) == doctest::Approx(std::pow(factor, 6) * e0).epsilon(1e-7));
}

TEST_CASE("divergence guard: an oversized step aborts") {
  const ModelParams p = decoupled();
  const std::size_t n = 16;
  const auto g = Grid::unit(2, n);
  const TimeGrid tg{0.2, 20, 2};
  const double h = 1.0 / n;
  const double k_eig = 2.0 * 4.0 / (h * h) * std::pow(std::sin(std::numbers::pi * h / 2.0), 2);
  const double mu = std::pow(1.0 + tg.dt() * p.lambda_phi * k_eig, -static_cast<double>(tg.n_steps));

  const StateTriple truth = healthy_state(g, p);
  StateTriple x0 = truth;
  x0.phi = Field::from_function(g, [](double x, double yy) {
    return 0.3 * std::sin(std::numbers::pi * x) * std::sin(std::numbers::pi * yy);
  });
  ReconstructionConfig c;
  c.initial_guess = InitialGuess::given;
  c.initial = x0;
  c.enforce_admissible = false;
  // Amplification |1 - tau mu^2| = 2 on the perturbed mode.
  c.tau = 3.0 / (mu * mu);
  c.max_iter = 50;
  CHECK_THROWS_AS(landweber_reconstruct(solution_operator_R(truth, p, tg), p, tg, c), NumericalError);
}

TEST_CASE("subspace iterates stay in the span") {
  const ModelParams p;
  const auto g = Grid::unit(2, 12);
  const TimeGrid tg{0.1, 10, 2};
  const StateTriple truth = make_phantom(g, PhantomKind::gaussian_bump, 4);
  const StateTriple y = solution_operator_R(truth, p, tg);
  ReconstructionConfig c;
  c.subspace_dim = 12;
  c.max_iter = 5;
  const auto r = landweber_reconstruct(y, p, tg, c, &truth);
  const SubspaceBasis b = build_coarse_basis(g, 2);
  CHECK(norm_l2(project_subspace(r.estimate, b) - r.estimate) < 1e-12 * norm_l2(r.estimate));
  CHECK(r.operator_norm > 0.0);
  CHECK(r.tau == doctest::Approx(0.9 / (r.operator_norm * r.operator_norm)));
}

TEST_CASE("noise-free reconstruction: residual decreases monotonically") {
  const ModelParams p;
  const auto g = Grid::unit(2, 16);
  const TimeGrid tg{0.1, 10, 2};
  const StateTriple truth = make_phantom(g, PhantomKind::two_foci, 9);
  const StateTriple y = solution_operator_R(truth, p, tg);
  ReconstructionConfig c;
  c.max_iter = 25;
  const auto r = landweber_reconstruct(y, p, tg, c, &truth);
  CHECK(r.stop == StopReason::max_iter);
  CHECK(r.iterations == 25);
  for (std::size_t k = 1; k < r.residuals.size(); ++k) {
    CAPTURE(k);
    CHECK(r.residuals[k] <= r.residuals[k - 1] * (1.0 + 1e-12));
  }
  CHECK(r.residuals.back() < 0.5 * r.residuals.front());
  CHECK(r.errors.back() < r.errors.front());
  CHECK(r.best_iteration.has_value());
}

TEST_CASE("noisy reconstruction stops by the discrepancy principle") {
  const ModelParams p;
  const auto g = Grid::unit(2, 16);
  const TimeGrid tg{0.1, 10, 2};
  const StateTriple truth = make_phantom(g, PhantomKind::gaussian_bump, 5);
  const StateTriple clean = solution_operator_R(truth, p, tg);
  const StateTriple y = add_noise(clean, 0.01, 3);
  ReconstructionConfig c;
  c.delta = norm_l2(y - clean);
  c.max_iter = 400;
  const auto r = landweber_reconstruct(y, p, tg, c, &truth);
  CHECK(r.stop == StopReason::discrepancy);
  CHECK(r.residuals[r.iterations] <= c.tau_dp * c.delta);
  if (r.iterations > 0) CHECK(r.residuals[r.iterations - 1] > c.tau_dp * c.delta);
  CHECK(*r.final_error < r.errors.front());
}
