#include "pfr/inverse.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "pfr/discretization.hpp"
#include "pfr/error.hpp"
#include "pfr/log.hpp"

namespace pfr {

PhantomKind phantom_kind_from_string(const std::string& s) {
  if (s == "gaussian_bump") return PhantomKind::gaussian_bump;
  if (s == "two_foci") return PhantomKind::two_foci;
  if (s == "annulus") return PhantomKind::annulus;
  throw InputError("unknown phantom kind '" + s + "' (expected gaussian_bump, two_foci or annulus)");
}

std::string to_string(PhantomKind k) {
  switch (k) {
    case PhantomKind::gaussian_bump: return "gaussian_bump";
    case PhantomKind::two_foci: return "two_foci";
    case PhantomKind::annulus: return "annulus";
  }
  return "?";
}

std::string to_string(StopReason r) {
  switch (r) {
    case StopReason::discrepancy: return "discrepancy";
    case StopReason::max_iter: return "max_iter";
    case StopReason::stagnation: return "stagnation";
  }
  return "?";
}

namespace {

double tanh_edge(double signed_distance, double width) {
  return 0.5 * (1.0 - std::tanh(signed_distance / width));
}

// Distance in unit coordinates; 1D grids ignore y.
double distance(const Grid& g, std::size_t k, double cx, double cy) {
  const double u = g.x(k) / g.extent(0) - cx;
  if (g.dim() == 1) return std::abs(u);
  const double v = g.y(k) / g.extent(1) - cy;
  return std::hypot(u, v);
}

Field steady_nutrient(const Field& phi, const ModelParams& p) {
  const GridPtr& grid = phi.grid_ptr();
  Field diag(grid);
  Field rhs(grid);
  for (std::size_t k = 0; k < grid->size(); ++k) {
    diag[k] = p.gamma_h + p.gamma_ch() * phi[k];
    if (!(diag[k] > 0.0)) throw InputError("phantom: nutrient uptake must be positive");
    rhs[k] = p.S_h + p.S_ch() * phi[k];
  }
  Field sigma(grid);
  for (std::size_t k = 0; k < grid->size(); ++k) sigma[k] = rhs[k] / diag[k];
  if (p.eta > 0.0) {
    const auto apply = [&](const Field& in, Field& out) {
      apply_helmholtz(in, out, Boundary::neumann, 0.0, p.eta);
      for (std::size_t k = 0; k < in.size(); ++k) out[k] += diag[k] * in[k];
    };
    cg_solve(apply, rhs, sigma, CgOptions{});
  }
  return sigma;
}

Field relaxed_psa(const Field& phi, const ModelParams& p) {
  const GridPtr& grid = phi.grid_ptr();
  const double p0 = p.gamma_p > 0.0 ? p.alpha_h / p.gamma_p : p.alpha_h;
  Field rhs(grid);
  for (std::size_t k = 0; k < grid->size(); ++k) rhs[k] = p0 + p.alpha_h + p.alpha_ch() * phi[k];
  Field psa(grid);
  psa.fill(p0);
  ImplicitOperator(grid, Boundary::neumann, 1.0 + p.gamma_p, p.D_p).solve(rhs, psa);
  return psa;
}

}  // namespace

StateTriple make_phantom(const GridPtr& grid, PhantomKind kind, std::uint64_t seed,
                         const PhantomOptions& options) {
  if (!(options.width > 0.0)) throw InputError("phantom: width must be positive");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> jitter(-0.05, 0.05);
  const double w = options.width;
  const Grid& g = *grid;

  StateTriple s = StateTriple::zeros(grid);
  switch (kind) {
    case PhantomKind::gaussian_bump: {
      const double cx = 0.5 + jitter(rng);
      const double cy = 0.5 + jitter(rng);
      const double r = 0.2 + 0.5 * jitter(rng);
      for (std::size_t k = 0; k < g.size(); ++k) s.phi[k] = tanh_edge(distance(g, k, cx, cy) - r, w);
      break;
    }
    case PhantomKind::two_foci: {
      const double ax = 0.33 + jitter(rng), ay = 0.4 + jitter(rng);
      const double bx = 0.67 + jitter(rng), by = 0.6 + jitter(rng);
      const double ra = 0.12 + 0.3 * jitter(rng), rb = 0.1 + 0.3 * jitter(rng);
      for (std::size_t k = 0; k < g.size(); ++k) {
        s.phi[k] = std::max(tanh_edge(distance(g, k, ax, ay) - ra, w),
                            tanh_edge(distance(g, k, bx, by) - rb, w));
      }
      break;
    }
    case PhantomKind::annulus: {
      const double cx = 0.5 + jitter(rng);
      const double cy = 0.5 + jitter(rng);
      const double r = 0.25 + 0.5 * jitter(rng);
      const double half = 0.07;
      for (std::size_t k = 0; k < g.size(); ++k) {
        s.phi[k] = tanh_edge(std::abs(distance(g, k, cx, cy) - r) - half, w);
      }
      break;
    }
  }
  zero_boundary(s.phi);
  s.sigma = steady_nutrient(s.phi, options.params);
  s.psa = relaxed_psa(s.phi, options.params);
  return project_admissible(s);
}

StateTriple random_admissible_state(const GridPtr& grid, std::uint64_t seed,
                                    const ModelParams& params) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const Grid& g = *grid;
  StateTriple s = StateTriple::zeros(grid);

  const int seeds = 1 + static_cast<int>(unit(rng) * 3.0) % 3;
  for (int i = 0; i < seeds; ++i) {
    const double cx = 0.25 + 0.5 * unit(rng);
    const double cy = 0.25 + 0.5 * unit(rng);
    const double r = 0.06 + 0.12 * unit(rng);
    const double w = 0.03 + 0.03 * unit(rng);
    for (std::size_t k = 0; k < g.size(); ++k) {
      s.phi[k] = std::max(s.phi[k], tanh_edge(distance(g, k, cx, cy) - r, w));
    }
  }
  zero_boundary(s.phi);

  const double sigma_eq = params.gamma_h > 0.0 ? params.S_h / params.gamma_h : 1.0;
  const double psa_eq = params.gamma_p > 0.0 ? params.alpha_h / params.gamma_p : 1.0;
  const StateTriple shape = random_smooth_triple(grid, rng());
  const double ns = std::max(shape.sigma.max_abs(), 1e-300);
  const double np = std::max(shape.psa.max_abs(), 1e-300);
  for (std::size_t k = 0; k < g.size(); ++k) {
    s.sigma[k] = sigma_eq * (1.0 + 0.3 * shape.sigma[k] / ns);
    s.psa[k] = psa_eq * (1.0 + 0.3 * shape.psa[k] / np);
  }
  return project_admissible(s);
}

StateTriple add_noise(const StateTriple& v, double level, std::uint64_t seed,
                      const AdmissibleBounds& bounds) {
  if (!(level >= 0.0) || !std::isfinite(level)) throw InputError("noise level must be >= 0");
  if (level == 0.0) return v;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  StateTriple out = v;
  for (int slot = 0; slot < 3; ++slot) {
    Field& f = out.slot(slot);
    const double sd = level * v.slot(slot).max_abs();
    for (std::size_t k = 0; k < f.size(); ++k) f[k] += sd * normal(rng);
  }
  return project_admissible(out, bounds);
}

StateTriple healthy_state(const GridPtr& grid, const ModelParams& params) {
  const double sigma = params.gamma_h > 0.0 ? params.S_h / params.gamma_h : 0.0;
  const double psa = params.gamma_p > 0.0 ? params.alpha_h / params.gamma_p : 0.0;
  return StateTriple::constant(grid, 0.0, sigma, psa);
}

bool discrepancy_stop(double residual, double delta, double tau_dp) {
  return residual <= tau_dp * delta;
}

// ---------------------------------------------------------------------------

void ReconstructionConfig::validate() const {
  if (tau && !(*tau > 0.0 && std::isfinite(*tau))) throw InputError("reconstruction: tau must be > 0");
  if (!(tau_dp >= 1.0)) throw InputError("reconstruction: tau_dp must be >= 1");
  if (!(delta >= 0.0) || !std::isfinite(delta)) throw InputError("reconstruction: delta must be >= 0");
  if (initial_guess == InitialGuess::given && !initial) {
    throw InputError("reconstruction: initial guess policy 'given' needs an initial state");
  }
  if (stagnation_window == 0 || divergence_window == 0) {
    throw InputError("reconstruction: windows must be >= 1");
  }
}

std::size_t subspace_modes_per_axis(const Grid& grid, std::size_t dim) {
  if (dim == 0 || dim % 3 != 0) {
    throw InputError("subspace dimension " + std::to_string(dim) + " is not a multiple of 3");
  }
  const std::size_t per_slot = dim / 3;
  std::size_t n = per_slot;
  if (grid.dim() == 2) {
    n = static_cast<std::size_t>(std::llround(std::sqrt(static_cast<double>(per_slot))));
    if (n * n != per_slot) {
      throw InputError("subspace dimension " + std::to_string(dim) + " is not 3 n^2 on a 2D grid");
    }
  }
  return n;
}

ReconstructionResult landweber_reconstruct(const StateTriple& y_meas, const ModelParams& p,
                                           const TimeGrid& tg, const ReconstructionConfig& cfg,
                                           const StateTriple* truth) {
  cfg.validate();
  if (!y_meas.all_finite()) throw InputError("reconstruction: measurement has non-finite values");
  const GridPtr& grid = y_meas.grid_ptr();
  if (truth) require_same_grid(*grid, truth->grid(), "reconstruction truth");

  std::optional<SubspaceBasis> basis;
  if (cfg.subspace_dim > 0) {
    basis = build_coarse_basis(grid, subspace_modes_per_axis(*grid, cfg.subspace_dim));
  }

  StateTriple x = StateTriple::zeros(grid);
  switch (cfg.initial_guess) {
    case InitialGuess::healthy: x = healthy_state(grid, p); break;
    case InitialGuess::zero: break;
    case InitialGuess::given:
      require_same_grid(*grid, cfg.initial->grid(), "reconstruction initial guess");
      x = *cfg.initial;
      break;
  }
  if (basis) x = project_subspace(x, *basis);

  const double truth_norm = truth ? norm_l2(*truth) : 0.0;
  auto rel_error = [&](const StateTriple& v) {
    const double d = norm_l2(v - *truth);
    return truth_norm > 0.0 ? d / truth_norm : d;
  };

  LinearisedOptions lo;
  lo.cg = cfg.cg;

  ReconstructionResult res;
  std::optional<std::size_t> hit;
  std::size_t increases = 0;
  for (std::size_t k = 0;; ++k) {
    const LinearisedOperator op(p, tg, x, lo);
    StateTriple r = y_meas - op.base_terminal();
    const double rn = norm_l2(r);
    if (!std::isfinite(rn)) throw NumericalError("reconstruction: non-finite residual");
    res.residuals.push_back(rn);
    if (truth) res.errors.push_back(rel_error(x));

    if (!hit && discrepancy_stop(rn, cfg.delta, cfg.tau_dp)) {
      hit = k;
      res.estimate = x;
      res.iterations = k;
      res.stop = StopReason::discrepancy;
      if (!cfg.continue_past_discrepancy) break;
    }
    if (k >= cfg.max_iter) {
      if (!hit) res.stop = StopReason::max_iter;
      break;
    }
    if (k >= cfg.stagnation_window) {
      const double old = res.residuals[k - cfg.stagnation_window];
      if (old - rn < cfg.stagnation_tol * old) {
        if (!hit) res.stop = StopReason::stagnation;
        break;
      }
    }
    if (k > 0 && rn > res.residuals[k - 1]) {
      ++increases;
      // Growth within the stagnation tolerance is treated as a plateau.
      if (increases >= cfg.divergence_window &&
          rn > res.residuals[k - increases] * (1.0 + cfg.stagnation_tol)) {
        std::ostringstream msg;
        msg << "Landweber diverged: residual grew " << increases << " times in a row, "
            << res.residuals[k - increases] << " -> " << rn << " at iteration " << k
            << " (tau " << res.tau << ")";
        throw NumericalError(msg.str());
      }
    } else {
      increases = 0;
    }

    if (k == 0) {
      if (cfg.tau) {
        res.tau = *cfg.tau;
      } else {
        PowerOptions po;
        po.seed = cfg.power_seed;
        if (basis) po.basis = &*basis;
        res.operator_norm = estimate_operator_norm(op, po).norm;
        if (!(res.operator_norm > 0.0)) throw NumericalError("reconstruction: derivative vanishes");
        res.tau = 0.9 / (res.operator_norm * res.operator_norm);
      }
    }

    StateTriple z = x;
    z.axpy(res.tau, op.apply_adjoint(r));
    if (cfg.enforce_admissible) z = project_admissible(z, cfg.bounds);
    if (basis) z = project_subspace(z, *basis);
    x = std::move(z);
  }
  if (!hit) {
    res.estimate = x;
    res.iterations = res.residuals.size() - 1;
  }
  if (truth) {
    res.final_error = res.errors[res.iterations];
    res.best_iteration = static_cast<std::size_t>(
        std::min_element(res.errors.begin(), res.errors.end()) - res.errors.begin());
  }
  return res;
}

}  // namespace pfr
