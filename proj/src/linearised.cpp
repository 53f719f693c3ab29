#include "pfr/linearised.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "pfr/discretization.hpp"
#include "pfr/error.hpp"
#include "pfr/log.hpp"

namespace pfr {
namespace {

ForwardOptions base_options(const LinearisedOptions& o) {
  ForwardOptions f;
  f.keep_all_steps = true;
  f.cg = o.cg;
  f.quiet = true;
  return f;
}

}  // namespace

LinearisedOperator::LinearisedOperator(const ModelParams& params, const TimeGrid& tg,
                                       const StateTriple& s0, LinearisedOptions options)
    : solver_(params, s0.grid_ptr(), tg, base_options(options)), options_(options) {
  base_ = solver_.solve(s0);
  if (base_.states.size() != tg.n_steps + 1) {
    throw InputError("linearised operator: base trajectory does not match the time grid");
  }
}

void LinearisedOperator::coupled_rhs(const StateTriple& base, const StateTriple& v,
                                     StateTriple& out) const {
  const ModelParams& p = params();
  const double dt = time_grid().dt();
  const double M = p.M_pot;
  const double s_ch = p.S_ch();
  const double g_ch = p.gamma_ch();
  const double a_ch = p.alpha_ch();
  const std::size_t n = v.grid().size();
  for (std::size_t k = 0; k < n; ++k) {
    const double phi = base.phi[k];
    const double sig = base.sigma[k];
    const double y = v.phi[k];
    const double z = v.sigma[k];
    const double g_phi = model::raw::F2(phi, M) - model::eval_m(sig, p) * model::raw::h2(phi, M);
    const double g_sig = -model::eval_m1(sig, p) * model::raw::h1(phi, M);
    out.phi[k] = y - dt * (g_phi * y + g_sig * z);
    out.sigma[k] = z + dt * (s_ch * y - g_ch * (sig * y + phi * z));
    out.psa[k] = v.psa[k] + dt * a_ch * y;
  }
  zero_boundary(out.phi);
}

void LinearisedOperator::coupled_rhs_transpose(const StateTriple& base, const StateTriple& v,
                                               StateTriple& out) const {
  const ModelParams& p = params();
  const double dt = time_grid().dt();
  const double M = p.M_pot;
  const double s_ch = p.S_ch();
  const double g_ch = p.gamma_ch();
  const double a_ch = p.alpha_ch();
  const Grid& g = v.grid();
  for (std::size_t k = 0; k < g.size(); ++k) {
    const double phi = base.phi[k];
    const double sig = base.sigma[k];
    const double a = g.on_boundary(k) ? 0.0 : v.phi[k];
    const double b = v.sigma[k];
    const double c = v.psa[k];
    const double g_phi = model::raw::F2(phi, M) - model::eval_m(sig, p) * model::raw::h2(phi, M);
    const double g_sig = -model::eval_m1(sig, p) * model::raw::h1(phi, M);
    out.phi[k] = (1.0 - dt * g_phi) * a + dt * (s_ch - g_ch * sig) * b + dt * a_ch * c;
    out.sigma[k] = -dt * g_sig * a + (1.0 - dt * g_ch * phi) * b;
    out.psa[k] = c;
  }
}

void LinearisedOperator::implicit_solve(const StateTriple& rhs, StateTriple& x) const {
  solver_.phi_operator().solve(rhs.phi, x.phi);
  solver_.sigma_operator().solve(rhs.sigma, x.sigma);
  solver_.psa_operator().solve(rhs.psa, x.psa);
}

std::vector<StateTriple> LinearisedOperator::apply_trajectory(const StateTriple& v) const {
  require_same_grid(*grid(), v.grid(), "apply_DR");
  const std::size_t n_steps = time_grid().n_steps;
  std::vector<StateTriple> out;
  out.reserve(n_steps + 1);
  out.push_back(v);
  StateTriple rhs = StateTriple::zeros(grid());
  for (std::size_t n = 0; n < n_steps; ++n) {
    coupled_rhs(base_.states[n], out.back(), rhs);
    StateTriple next = out.back();
    implicit_solve(rhs, next);
    out.push_back(std::move(next));
  }
  return out;
}

StateTriple LinearisedOperator::apply(const StateTriple& v) const {
  require_same_grid(*grid(), v.grid(), "apply_DR");
  StateTriple cur = v;
  StateTriple rhs = StateTriple::zeros(grid());
  for (std::size_t n = 0; n < time_grid().n_steps; ++n) {
    coupled_rhs(base_.states[n], cur, rhs);
    implicit_solve(rhs, cur);
  }
  return cur;
}

StateTriple LinearisedOperator::apply_adjoint(const StateTriple& g) const {
  require_same_grid(*grid(), g.grid(), "apply_DR_adjoint");
  StateTriple w = g;
  StateTriple solved = g;
  for (std::size_t n = time_grid().n_steps; n-- > 0;) {
    implicit_solve(w, solved);
    coupled_rhs_transpose(base_.states[n], solved, w);
  }
  if (options_.flip_adjoint_sign) w *= -1.0;
  return w;
}

StateTriple apply_DR(const LinearisedOperator& op, const StateTriple& v) { return op.apply(v); }

StateTriple apply_DR_adjoint(const LinearisedOperator& op, const StateTriple& g) {
  return op.apply_adjoint(g);
}

// ---------------------------------------------------------------------------

StateTriple random_smooth_triple(const GridPtr& grid, std::uint64_t seed, double node_noise) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  constexpr double pi = std::numbers::pi;
  constexpr int modes = 4;
  const bool two_d = grid->dim() == 2;
  const double lx = grid->extent(0);
  const double ly = two_d ? grid->extent(1) : 1.0;
  const int ly_modes = two_d ? modes : 1;

  StateTriple out = StateTriple::zeros(grid);
  for (int slot = 0; slot < 3; ++slot) {
    std::vector<double> coef(static_cast<std::size_t>(modes * ly_modes));
    for (double& c : coef) c = normal(rng);
    Field& f = out.slot(slot);
    for (std::size_t k = 0; k < grid->size(); ++k) {
      const double x = grid->x(k);
      const double y = grid->y(k);
      double v = 0.0;
      for (int l = 0; l < ly_modes; ++l) {
        for (int m = 0; m < modes; ++m) {
          const double c = coef[static_cast<std::size_t>(l * modes + m)] / (1.0 + m * m + l * l);
          if (slot == 0) {
            v += c * std::sin((m + 1) * pi * x / lx) * (two_d ? std::sin((l + 1) * pi * y / ly) : 1.0);
          } else {
            v += c * std::cos(m * pi * x / lx) * (two_d ? std::cos(l * pi * y / ly) : 1.0);
          }
        }
      }
      f[k] = v;
    }
    if (node_noise > 0.0) {
      for (std::size_t k = 0; k < grid->size(); ++k) f[k] += node_noise * normal(rng);
    }
  }
  zero_boundary(out.phi);
  return out;
}

std::vector<StateTriple> derivative_probes(const GridPtr& grid, std::size_t n_basis,
                                           std::size_t n_random, std::uint64_t seed) {
  std::vector<StateTriple> probes;
  if (n_basis > 0) {
    std::size_t per_axis = 1;
    const std::size_t per_slot_pow = grid->dim() == 2 ? 2 : 1;
    auto count = [&](std::size_t n) { return 3 * (per_slot_pow == 2 ? n * n : n); };
    while (count(per_axis) < n_basis) ++per_axis;
    const SubspaceBasis basis = build_coarse_basis(grid, per_axis);
    for (std::size_t i = 0; i < n_basis; ++i) probes.push_back(basis.elements[i]);
  }
  for (std::size_t i = 0; i < n_random; ++i) {
    StateTriple r = random_smooth_triple(grid, seed + 7919 * (i + 1));
    r *= 1.0 / norm_l2(r);
    probes.push_back(std::move(r));
  }
  return probes;
}

NormEstimate estimate_operator_norm(const LinearisedOperator& op, const PowerOptions& opts) {
  auto restrict_input = [&](const StateTriple& v) {
    return opts.basis ? project_subspace(v, *opts.basis) : v;
  };
  StateTriple x = opts.start ? *opts.start : random_smooth_triple(op.grid(), opts.seed, 1e-3);
  x = restrict_input(x);
  double nx = norm_l2(x);
  if (!(nx > 0.0)) throw InputError("power iteration: start vector vanishes on the input space");
  x *= 1.0 / nx;

  NormEstimate est;
  double rq_prev = -1.0;
  for (std::size_t it = 1; it <= opts.max_iter; ++it) {
    StateTriple y = restrict_input(op.apply_adjoint(op.apply(x)));
    const double rq = inner_product_l2(x, y);
    est.iterations = it;
    est.norm = std::sqrt(std::max(rq, 0.0));
    est.direction = x;
    const double ny = norm_l2(y);
    if (!(ny > 0.0)) {
      est.converged = true;
      break;
    }
    if (rq_prev >= 0.0 && std::abs(rq - rq_prev) <= opts.rel_tol * std::abs(rq)) {
      est.converged = true;
      break;
    }
    rq_prev = rq;
    x = std::move(y);
    x *= 1.0 / ny;
  }
  if (!est.converged) {
    std::ostringstream msg;
    msg << "power iteration reached " << opts.max_iter << " iterations; best estimate " << est.norm;
    log::warn(msg.str());
  }
  return est;
}

TaylorResult taylor_test(const LinearisedOperator& op, const StateTriple& h,
                         const std::vector<double>& eps) {
  if (eps.size() < 2) throw InputError("taylor test: need at least two step sizes");
  ForwardOptions fo;
  fo.quiet = true;
  const ForwardSolver solver(op.params(), op.grid(), op.time_grid(), fo);
  const StateTriple& s0 = op.base().initial();
  const StateTriple& r0 = op.base_terminal();
  const StateTriple dr = op.apply(h);

  TaylorResult res;
  res.eps = eps;
  for (double e : eps) {
    StateTriple shifted = s0;
    shifted.axpy(e, h);
    StateTriple rem = solver.terminal(shifted);
    rem -= r0;
    rem.axpy(-e, dr);
    res.remainder.push_back(norm_l2(rem));
  }
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double n = static_cast<double>(eps.size());
  for (std::size_t i = 0; i < eps.size(); ++i) {
    const double lx = std::log(eps[i]);
    const double ly = std::log(res.remainder[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
    if (i > 0) {
      res.slopes.push_back((ly - std::log(res.remainder[i - 1])) / (lx - std::log(eps[i - 1])));
    }
  }
  res.slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  return res;
}

AdjointResult adjoint_test(const LinearisedOperator& op, std::size_t pairs, std::uint64_t seed) {
  AdjointResult res;
  for (std::size_t i = 0; i < pairs; ++i) {
    const StateTriple u = random_smooth_triple(op.grid(), seed + 2 * i, 0.1);
    const StateTriple g = random_smooth_triple(op.grid(), seed + 2 * i + 1, 0.1);
    const double lhs = inner_product_l2(op.apply(u), g);
    const double rhs = inner_product_l2(u, op.apply_adjoint(g));
    const double scale = norm_l2(u) * norm_l2(g);
    res.max_mismatch = std::max(res.max_mismatch, std::abs(lhs - rhs) / scale);
    ++res.pairs;
  }
  return res;
}

LipschitzDerivativeReport lipschitz_derivative_check(const StateTriple& a, const StateTriple& b,
                                                     const ModelParams& p, const TimeGrid& tg,
                                                     const std::vector<StateTriple>& probes) {
  LipschitzDerivativeReport rep;
  rep.distance = norm_l2(a - b);
  if (rep.distance == 0.0) return rep;
  const LinearisedOperator op_a(p, tg, a);
  const LinearisedOperator op_b(p, tg, b);
  for (const StateTriple& h : probes) {
    const double nh = norm_l2(h);
    if (nh == 0.0) continue;
    rep.sup_difference = std::max(rep.sup_difference, norm_l2(op_a.apply(h) - op_b.apply(h)) / nh);
  }
  rep.ratio = rep.sup_difference / rep.distance;
  return rep;
}

nlohmann::json derivative_report_json(const std::vector<double>& taylor_slopes,
                                      double adjoint_mismatch, double operator_norm) {
  return nlohmann::json{{"taylor_slopes", taylor_slopes},
                        {"adjoint_mismatch", adjoint_mismatch},
                        {"operator_norm", operator_norm}};
}

}  // namespace pfr
