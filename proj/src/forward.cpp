#include "pfr/forward.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "pfr/discretization.hpp"
#include "pfr/error.hpp"
#include "pfr/log.hpp"

namespace pfr {

void TimeGrid::validate() const {
  if (!std::isfinite(t_final) || t_final < 0.0) throw InputError("time grid: t_final must be >= 0");
  if (n_steps == 0 && t_final != 0.0) throw InputError("time grid: n_steps must be >= 1");
  if (n_steps > 0 && !(t_final > 0.0)) throw InputError("time grid: dt must be > 0");
  if (n_snapshots < 2) throw InputError("time grid: need at least 2 snapshots");
}

std::vector<std::size_t> snapshot_steps(const TimeGrid& tg) {
  std::vector<std::size_t> steps;
  if (tg.n_steps == 0) return {0};
  const std::size_t s = std::max<std::size_t>(tg.n_snapshots, 2);
  for (std::size_t k = 0; k < s; ++k) {
    const double pos = static_cast<double>(k) * static_cast<double>(tg.n_steps) /
                       static_cast<double>(s - 1);
    const auto idx = static_cast<std::size_t>(std::llround(pos));
    if (steps.empty() || idx != steps.back()) steps.push_back(idx);
  }
  steps.back() = tg.n_steps;
  return steps;
}

// ---------------------------------------------------------------------------

namespace {

double upper(const std::optional<Field>& f, double c, std::size_t k) {
  return f ? (*f)[k] : c;
}

}  // namespace

StateTriple project_admissible(const StateTriple& v, const AdmissibleBounds& b) {
  StateTriple out = v;
  const Grid& g = v.grid();
  for (std::size_t k = 0; k < g.size(); ++k) {
    out.phi[k] = g.on_boundary(k) ? 0.0 : std::clamp(v.phi[k], 0.0, 1.0);
    out.sigma[k] = std::clamp(v.sigma[k], 0.0, std::max(0.0, upper(b.sigma_max_field, b.sigma_max, k)));
    out.psa[k] = std::clamp(v.psa[k], 0.0, std::max(0.0, upper(b.psa_max_field, b.psa_max, k)));
  }
  return out;
}

bool is_admissible(const StateTriple& v, const AdmissibleBounds& b, double tol) {
  const Grid& g = v.grid();
  for (std::size_t k = 0; k < g.size(); ++k) {
    if (g.on_boundary(k) && std::abs(v.phi[k]) > tol) return false;
    if (v.phi[k] < -tol || v.phi[k] > 1.0 + tol) return false;
    if (v.sigma[k] < -tol || v.sigma[k] > upper(b.sigma_max_field, b.sigma_max, k) + tol) return false;
    if (v.psa[k] < -tol || v.psa[k] > upper(b.psa_max_field, b.psa_max, k) + tol) return false;
  }
  return true;
}

void RunMonitor::observe(const StateTriple& s) {
  phi_min = std::min(phi_min, s.phi.min());
  phi_max = std::max(phi_max, s.phi.max());
  sigma_min = std::min(sigma_min, s.sigma.min());
  psa_min = std::min(psa_min, s.psa.min());
}

double max_reaction_rate(const ModelParams& p) {
  const double m_max = p.m_ref * std::max(std::abs(p.rho), std::abs(p.A_apop));
  // |d/dphi (F' - m h')| <= 2M + 6M|m| on [0,1].
  const double phase = 2.0 * p.M_pot * (1.0 + 3.0 * m_max);
  return std::max({phase, std::abs(p.gamma_h), std::abs(p.gamma_c), std::abs(p.gamma_p)});
}

// ---------------------------------------------------------------------------

ForwardSolver::ForwardSolver(ModelParams params, GridPtr grid, TimeGrid tg, ForwardOptions options)
    : params_(params),
      grid_(std::move(grid)),
      tg_(tg),
      options_(std::move(options)),
      dt_(tg.dt()),
      a_phi_(grid_, Boundary::dirichlet, 1.0, dt_ * params.lambda_phi, options_.cg),
      a_sigma_(grid_, Boundary::neumann, 1.0 + dt_ * params.gamma_h, dt_ * params.eta, options_.cg),
      a_psa_(grid_, Boundary::neumann, 1.0 + dt_ * params.gamma_p, dt_ * params.D_p, options_.cg) {
  tg_.validate();
  if (options_.quiet) return;
  for (const auto& w : params_.validate()) log::warn("model parameters: " + w);
  const double rate = max_reaction_rate(params_);
  if (rate > 0.0 && dt_ > 0.5 / rate) {
    std::ostringstream msg;
    msg << "dt = " << dt_ << " exceeds the explicit reaction cap 0.5/" << rate;
    log::warn(msg.str());
  }
}

StateTriple ForwardSolver::step(const StateTriple& s, double t_new) const {
  require_same_grid(*grid_, s.grid(), "forward step");
  const Grid& g = *grid_;
  const ModelParams& p = params_;
  const double dt = dt_;
  const double M = p.M_pot;
  const double s_ch = p.S_ch();
  const double g_ch = p.gamma_ch();
  const double a_ch = p.alpha_ch();

  StateTriple rhs = StateTriple::zeros(grid_);
  for (std::size_t k = 0; k < g.size(); ++k) {
    const double phi = s.phi[k];
    const double sig = s.sigma[k];
    const double react = model::raw::F1(phi, M) - model::eval_m(sig, p) * model::raw::h1(phi, M);
    rhs.phi[k] = phi - dt * react;
    rhs.sigma[k] = sig + dt * (p.S_h + s_ch * phi - g_ch * sig * phi);
    rhs.psa[k] = s.psa[k] + dt * (p.alpha_h + a_ch * phi);
  }
  if (options_.source) {
    StateTriple src = StateTriple::zeros(grid_);
    options_.source(t_new, src);
    rhs.axpy(dt, src);
  }
  zero_boundary(rhs.phi);

  StateTriple next = s;
  try {
    std::size_t iters = a_phi_.solve(rhs.phi, next.phi).iterations;
    iters = std::max(iters, a_sigma_.solve(rhs.sigma, next.sigma).iterations);
    iters = std::max(iters, a_psa_.solve(rhs.psa, next.psa).iterations);
    last_cg_iterations_ = iters;
  } catch (const NumericalError& e) {
    std::ostringstream msg;
    msg << "step to t = " << t_new << ": " << e.what();
    throw NumericalError(msg.str());
  }
  return next;
}

Trajectory ForwardSolver::solve(const StateTriple& s0) const {
  require_same_grid(*grid_, s0.grid(), "solve_forward");
  if (!s0.all_finite()) throw NumericalError("initial state contains non-finite values");
  if (!options_.quiet && !is_admissible(s0, {}, 1e-12)) log::warn("initial state is outside the admissible set");

  Trajectory traj;
  traj.time_grid = tg_;
  const std::vector<std::size_t> keep = options_.keep_all_steps ? std::vector<std::size_t>{}
                                                                : snapshot_steps(tg_);
  std::size_t next_keep = 0;
  auto record = [&](std::size_t n, const StateTriple& s) {
    const bool stored = options_.keep_all_steps || (next_keep < keep.size() && keep[next_keep] == n);
    if (!stored) return;
    if (!options_.keep_all_steps) ++next_keep;
    traj.steps.push_back(n);
    traj.times.push_back(static_cast<double>(n) * dt_);
    traj.states.push_back(s);
  };

  traj.monitor.observe(s0);
  record(0, s0);
  StateTriple cur = s0;
  for (std::size_t n = 1; n <= tg_.n_steps; ++n) {
    const double t_new = static_cast<double>(n) * dt_;
    cur = step(cur, t_new);
    traj.monitor.max_cg_iterations = std::max(traj.monitor.max_cg_iterations, last_cg_iterations_);
    if (!cur.all_finite()) {
      std::ostringstream msg;
      msg << "non-finite state at t = " << t_new << " (step " << n << ")";
      throw NumericalError(msg.str());
    }
    traj.monitor.observe(cur);
    record(n, cur);
  }
  if (tg_.n_steps > 0) traj.times.back() = tg_.t_final;
  if (!options_.quiet && traj.monitor.phi_bound_violated()) {
    std::ostringstream msg;
    msg << "phase field left [-1e-2, 1+1e-2]: min " << traj.monitor.phi_min << ", max "
        << traj.monitor.phi_max;
    log::warn(msg.str());
  }
  return traj;
}

StateTriple ForwardSolver::terminal(const StateTriple& s0) const {
  require_same_grid(*grid_, s0.grid(), "solution operator");
  StateTriple cur = s0;
  for (std::size_t n = 1; n <= tg_.n_steps; ++n) {
    const double t_new = static_cast<double>(n) * dt_;
    cur = step(cur, t_new);
    if (!cur.all_finite()) {
      std::ostringstream msg;
      msg << "non-finite state at t = " << t_new << " (step " << n << ")";
      throw NumericalError(msg.str());
    }
  }
  return cur;
}

StateTriple step(const StateTriple& s, const ModelParams& p, double dt) {
  TimeGrid tg{dt, 1, 2};
  return ForwardSolver(p, s.grid_ptr(), tg).step(s, dt);
}

Trajectory solve_forward(const StateTriple& s0, const ModelParams& p, const TimeGrid& tg,
                         const ForwardOptions& options) {
  return ForwardSolver(p, s0.grid_ptr(), tg, options).solve(s0);
}

StateTriple solution_operator_R(const StateTriple& s0, const ModelParams& p, const TimeGrid& tg) {
  if (tg.n_steps == 0) {
    tg.validate();
    return s0;
  }
  return ForwardSolver(p, s0.grid_ptr(), tg).terminal(s0);
}

}  // namespace pfr
