#include "pfr/stability.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "pfr/discretization.hpp"
#include "pfr/error.hpp"
#include "pfr/inverse.hpp"
#include "pfr/parallel.hpp"

namespace pfr {

double beta_of(double gamma, double T) {
  if (!(T > 0.0)) throw InputError("beta: T must be > 0");
  if (gamma == 0.0) return 1.0 / T;
  return gamma / std::expm1(gamma * T);
}

namespace {

// lambda_1 and lambda_2 without overflow for large gamma T.
double weight(double t, double T, double gamma, HolderTemplate which) {
  const double l1 = std::expm1(-gamma * t) / std::expm1(-gamma * T);
  if (which == HolderTemplate::lambda1) return l1;
  if (gamma * T < 1.0) return std::expm1(gamma * t) / std::expm1(gamma * T);
  return std::exp(-gamma * (T - t)) * l1;
}

void check_curves(const std::vector<DistanceCurve>& curves, double M) {
  if (curves.empty()) throw InputError("holder fit: no distance curves");
  for (const auto& c : curves) {
    if (c.times.size() != c.d.size() || c.times.size() < 2) {
      throw InputError("holder fit: a curve needs matching times and at least two samples");
    }
    if (!(c.times.back() > c.times.front())) throw InputError("holder fit: times must increase");
    if (!(c.d.back() > 0.0)) {
      throw InputError(
          "holder fit: terminal distance is zero; distinct initial data cannot reach identical "
          "terminal states (backward uniqueness), so the inputs coincide");
    }
    for (double d : c.d) {
      if (!(d >= 0.0) || d > M) throw InputError("holder fit: M must bound every distance");
    }
    if (!(c.d.back() < M)) throw InputError("holder fit: need d(T) < M");
  }
}

double log_c1(const std::vector<DistanceCurve>& curves, double logM, double gamma,
              HolderTemplate which) {
  double worst = -std::numeric_limits<double>::infinity();
  for (const auto& c : curves) {
    const double t0 = c.times.front();
    const double T = c.times.back() - t0;
    const double logdT = std::log(c.d.back());
    for (std::size_t i = 0; i < c.d.size(); ++i) {
      const double lam = weight(c.times[i] - t0, T, gamma, which);
      const double v = c.d[i] > 0.0 ? std::log(c.d[i]) - (1.0 - lam) * logM - lam * logdT
                                    : -std::numeric_limits<double>::infinity();
      worst = std::max(worst, v);
    }
  }
  return worst;
}

std::vector<double> lambda_emp_curve(const DistanceCurve& c, double M, double C1) {
  std::vector<double> out(c.d.size());
  const double denom = std::log(c.d.back() / M);
  for (std::size_t i = 0; i < c.d.size(); ++i) out[i] = std::log(c.d[i] / (C1 * M)) / denom;
  return out;
}

}  // namespace

LambdaWeights lambda_weights(double t, double T, double gamma) {
  if (!(T > 0.0)) throw InputError("lambda weights: T must be > 0");
  if (!(t >= 0.0 && t <= T)) throw InputError("lambda weights: t must lie in [0, T]");
  if (!(gamma > 0.0)) throw InputError("lambda weights: gamma must be > 0");
  return {weight(t, T, gamma, HolderTemplate::lambda1), weight(t, T, gamma, HolderTemplate::lambda2),
          beta_of(gamma, T) * t};
}

std::string to_string(HolderTemplate t) {
  return t == HolderTemplate::lambda1 ? "lambda1" : "lambda2";
}

TemplateFit fit_template(const std::vector<DistanceCurve>& curves, double M, HolderTemplate which) {
  check_curves(curves, M);
  const double logM = std::log(M);
  double T = 0.0;
  for (const auto& c : curves) T = std::max(T, c.times.back() - c.times.front());

  // Log grid over gamma T in [1e-6, 200], then golden-section refinement
  // around the best node.
  const int n = 161;
  const double lo = std::log(1e-6 / T), hi = std::log(200.0 / T);
  std::vector<double> lg(n), val(n);
  int best = 0;
  for (int i = 0; i < n; ++i) {
    lg[i] = lo + (hi - lo) * i / (n - 1);
    val[i] = log_c1(curves, logM, std::exp(lg[i]), which);
    if (val[i] < val[best]) best = i;
  }
  double a = lg[std::max(best - 1, 0)], b = lg[std::min(best + 1, n - 1)];
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double x1 = b - inv_phi * (b - a), x2 = a + inv_phi * (b - a);
  double f1 = log_c1(curves, logM, std::exp(x1), which);
  double f2 = log_c1(curves, logM, std::exp(x2), which);
  for (int it = 0; it < 60; ++it) {
    if (f1 <= f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - inv_phi * (b - a);
      f1 = log_c1(curves, logM, std::exp(x1), which);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + inv_phi * (b - a);
      f2 = log_c1(curves, logM, std::exp(x2), which);
    }
  }
  double lg_best = lg[best], f_best = val[best];
  if (f1 < f_best) lg_best = x1, f_best = f1;
  if (f2 < f_best) lg_best = x2, f_best = f2;

  TemplateFit fit;
  fit.gamma = std::exp(lg_best);
  fit.C1 = std::exp(f_best);

  double sq = 0.0;
  std::size_t count = 0;
  for (const auto& c : curves) {
    const auto emp = lambda_emp_curve(c, M, fit.C1);
    const double t0 = c.times.front(), Tc = c.times.back() - t0;
    for (std::size_t i = 1; i + 1 < c.d.size(); ++i) {
      const double diff = emp[i] - weight(c.times[i] - t0, Tc, fit.gamma, which);
      sq += diff * diff;
      ++count;
    }
  }
  fit.residual = count ? std::sqrt(sq / static_cast<double>(count)) : 0.0;
  return fit;
}

std::size_t holder_violations(const std::vector<DistanceCurve>& curves, double M, double gamma,
                              double C1, HolderTemplate which) {
  std::size_t v = 0;
  for (const auto& c : curves) {
    const double t0 = c.times.front(), T = c.times.back() - t0;
    for (std::size_t i = 0; i < c.d.size(); ++i) {
      const double lam = weight(c.times[i] - t0, T, gamma, which);
      const double bound = C1 * std::pow(M, 1.0 - lam) * std::pow(c.d.back(), lam);
      if (c.d[i] > bound * (1.0 + 1e-12)) ++v;
    }
  }
  return v;
}

HolderFit holder_fit(const std::vector<DistanceCurve>& curves, double M) {
  HolderFit fit;
  fit.M = M;
  fit.lambda1 = fit_template(curves, M, HolderTemplate::lambda1);
  fit.lambda2 = fit_template(curves, M, HolderTemplate::lambda2);
  const bool first = fit.lambda1.residual <= fit.lambda2.residual;
  fit.chosen = first ? HolderTemplate::lambda1 : HolderTemplate::lambda2;
  const TemplateFit& t = first ? fit.lambda1 : fit.lambda2;
  fit.gamma = t.gamma;
  fit.C1 = t.C1;
  fit.violations = holder_violations(curves, M, fit.gamma, fit.C1, fit.chosen);
  fit.lambda_emp = lambda_emp_curve(curves.front(), M, fit.C1);
  return fit;
}

DistanceCurve distance_curve(const Trajectory& a, const Trajectory& b) {
  if (a.times != b.times) throw InputError("distance curve: trajectories use different time grids");
  DistanceCurve c;
  c.times = a.times;
  for (std::size_t i = 0; i < a.size(); ++i) c.d.push_back(norm_l2(a.states[i] - b.states[i]));
  return c;
}

HolderFit holder_fit(const Trajectory& a, const Trajectory& b, double M) {
  const DistanceCurve c = distance_curve(a, b);
  if (M <= 0.0) {
    for (const auto* tr : {&a, &b}) {
      for (const auto& s : tr->states) M = std::max(M, norm_l2(s));
    }
    M = std::max(M, *std::max_element(c.d.begin(), c.d.end()));
  }
  return holder_fit(std::vector<DistanceCurve>{c}, M);
}

// ---------------------------------------------------------------------------

LogConvexityReport log_convexity_diagnostic(const std::vector<double>& times,
                                            const std::vector<double>& q) {
  if (times.size() != q.size() || q.size() < 3) {
    throw InputError("log convexity: need at least three matching samples");
  }
  const double dt = times[1] - times[0];
  if (!(dt > 0.0)) throw InputError("log convexity: times must increase");
  for (std::size_t i = 1; i < times.size(); ++i) {
    if (std::abs((times[i] - times[i - 1]) - dt) > 1e-9 * dt) {
      throw InputError("log convexity: samples must be uniformly spaced (stride 1)");
    }
  }
  LogConvexityReport r;
  for (double v : q) {
    if (!(v > 0.0)) throw InputError("log convexity: ||psi(t)||^2 vanishes at some time");
    r.log_q.push_back(std::log(v));
  }
  r.min_second_diff = std::numeric_limits<double>::infinity();
  for (std::size_t i = 1; i + 1 < q.size(); ++i) {
    const double d2 = (r.log_q[i + 1] - 2.0 * r.log_q[i] + r.log_q[i - 1]) / (dt * dt);
    const double d1 = (r.log_q[i + 1] - r.log_q[i - 1]) / (2.0 * dt);
    r.second_diff.push_back(d2);
    r.min_second_diff = std::min(r.min_second_diff, d2);
    if (d2 < 0.0) r.c_min = std::max(r.c_min, -d2 / (std::abs(d1) + 1.0));
  }
  return r;
}

LogConvexityReport log_convexity_diagnostic(const DistanceCurve& curve) {
  std::vector<double> q(curve.d.size());
  for (std::size_t i = 0; i < q.size(); ++i) q[i] = curve.d[i] * curve.d[i];
  return log_convexity_diagnostic(curve.times, q);
}

// ---------------------------------------------------------------------------

LogConstants compute_log_constants(double M, double M1, double C1, double gamma, double T) {
  for (double v : {M, M1, C1, gamma, T}) {
    if (!(v > 0.0) || !std::isfinite(v)) throw InputError("log constants: inputs must be positive");
  }
  LogConstants c;
  c.beta = beta_of(gamma, T);
  c.C2 = 2.0 * M1 * M * std::sqrt(C1) / std::sqrt(c.beta) + 3.0 * M1 * M1 / (4.0 * c.beta * C1);
  const double k = std::min(1.0, 4.0 * std::sqrt(3.0) * M * std::pow(C1, 1.5) / (9.0 * M1));
  c.eps_threshold = std::exp(-1.0 / k);
  return c;
}

XBracket solve_x_bracket(double r) {
  const double r_max = 2.0 * std::sqrt(3.0) / 9.0;
  const auto g = [](double x) { return x * std::sqrt(1.0 - x); };
  const double g_top = g(2.0 / 3.0);
  if (!(r > 0.0)) throw InputError("x bracket: r must be > 0");
  if (r > std::max(r_max, g_top) * (1.0 + 4.0 * std::numeric_limits<double>::epsilon())) {
    throw InputError("x bracket: r exceeds the maximum 2 sqrt(3)/9 of x sqrt(1-x); no solution");
  }
  XBracket b{r, 2.0 / 3.0, std::sqrt(3.0) * r};
  // Within rounding of the maximum the double root is unresolvable; return the maximiser.
  if (r >= std::min(r_max, g_top) * (1.0 - 4.0 * std::numeric_limits<double>::epsilon())) return b;
  double lo = 0.0, hi = 2.0 / 3.0;
  for (int it = 0; it < 200 && hi - lo > 0.0; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid == lo || mid == hi) break;
    (g(mid) < r ? lo : hi) = mid;
  }
  b.x_bar = hi;
  return b;
}

LipschitzChain compute_lipschitz_chain(double C0, double Q2, double L, double C_Lambda, double M,
                                       double C2, double Cbar, double /*m_bound*/) {
  for (double v : {L, C_Lambda, M, Cbar}) {
    if (!(v > 0.0) || !std::isfinite(v)) throw InputError("lipschitz chain: inputs must be positive");
  }
  for (double v : {C0, Q2, C2}) {
    if (!(v >= 0.0) || !std::isfinite(v)) throw InputError("lipschitz chain: inputs must be >= 0");
  }
  LipschitzChain c;
  c.log_m0 = std::log(L) - std::log(C_Lambda) - Q2 * Q2;
  c.m0 = std::exp(c.log_m0);

  // log of the exponent 16 C0^2 C2 / m0
  const double log_expo = std::log(16.0) + 2.0 * std::log(C0) + std::log(C2) - c.log_m0;
  const double log_first_prefactor = std::log(2.0 * Cbar / M);
  const double log_second = std::log(2.0) - c.log_m0;
  const double expo = std::exp(log_expo);
  c.log_Cs = std::max(log_first_prefactor + expo, log_second);
  c.saturated = !std::isfinite(c.log_Cs);

  // log log C_s without forming C_s.
  if (c.saturated) {
    c.log_log_Cs = log_expo + std::log1p(log_first_prefactor / expo);
    if (!std::isfinite(c.log_log_Cs)) c.log_log_Cs = log_expo;
  } else {
    c.log_log_Cs = c.log_Cs > 0.0 ? std::log(c.log_Cs) : -std::numeric_limits<double>::infinity();
  }
  c.Cs = std::exp(c.log_Cs);
  if (!std::isfinite(c.Cs)) c.saturated = true;
  return c;
}

// ---------------------------------------------------------------------------

double h1_time_norm(const std::vector<StateTriple>& states, double dt) {
  if (states.size() < 2 || !(dt > 0.0)) throw InputError("h1 time norm: need two states and dt > 0");
  double l2 = 0.0, deriv = 0.0;
  for (std::size_t n = 0; n < states.size(); ++n) {
    const double w = (n == 0 || n + 1 == states.size()) ? 0.5 : 1.0;
    const double v = norm_l2(states[n]);
    l2 += w * dt * v * v;
    if (n + 1 < states.size()) {
      const double d = norm_l2(states[n + 1] - states[n]) / dt;
      deriv += dt * d * d;
    }
  }
  return std::sqrt(l2 + deriv);
}

LinearisedStability linearised_stability_report(const LinearisedOperator& op,
                                                const std::vector<StateTriple>& probes,
                                                std::size_t jobs) {
  std::vector<StateTriple> unit;
  for (const auto& h : probes) {
    const double n = norm_l2(h);
    if (n > 0.0) unit.push_back((1.0 / n) * h);
  }
  if (unit.empty()) throw InputError("linearised stability: empty probe set");

  const double dt = op.time_grid().dt();
  std::vector<DistanceCurve> curves(unit.size());
  std::vector<double> sup(unit.size()), h1(unit.size());
  parallel_for(unit.size(), jobs, [&](std::size_t i) {
    const auto traj = op.apply_trajectory(unit[i]);
    DistanceCurve& c = curves[i];
    for (std::size_t n = 0; n < traj.size(); ++n) {
      c.times.push_back(static_cast<double>(n) * dt);
      c.d.push_back(norm_l2(traj[n]));
    }
    sup[i] = *std::max_element(c.d.begin(), c.d.end());
    h1[i] = h1_time_norm(traj, dt);
  });

  LinearisedStability r;
  r.L = *std::max_element(sup.begin(), sup.end());
  r.L1 = *std::max_element(h1.begin(), h1.end());
  // Strictly above every distance so that d(T) < L holds for the fit.
  const double M = r.L * (1.0 + 1e-12);
  const HolderFit fit = holder_fit(curves, M);
  r.Q1 = fit.C1;
  r.gamma = fit.gamma;
  r.chosen = fit.chosen;
  r.beta = beta_of(r.gamma, op.time_grid().t_final);
  r.Q2 = 2.0 * r.L1 * r.L * std::sqrt(r.Q1) / std::sqrt(r.beta) +
         3.0 * r.L1 * r.L1 / (4.0 * r.beta * r.Q1);
  return r;
}

// ---------------------------------------------------------------------------

StabilityReport compute_stability_report(const ModelParams& p, const GridPtr& grid,
                                         const TimeGrid& tg, const StabilityConfig& cfg) {
  if (cfg.ensemble_size < 2 || cfg.ensemble_size % 2 != 0) {
    throw InputError("stability: ensemble size must be even and >= 2");
  }
  tg.validate();
  if (tg.n_steps == 0) throw InputError("stability: need at least one time step");

  StabilityReport rep;
  rep.ensemble_size = cfg.ensemble_size;
  rep.seed = cfg.seed;
  rep.T = tg.t_final;

  std::vector<StateTriple> members;
  for (std::size_t i = 0; i < cfg.ensemble_size; ++i) {
    members.push_back(random_admissible_state(grid, cfg.seed + i, p));
  }

  ForwardOptions fo;
  fo.keep_all_steps = true;
  fo.quiet = true;
  const ForwardSolver solver(p, grid, tg, fo);

  const std::size_t pairs = cfg.ensemble_size / 2;
  std::vector<DistanceCurve> curves(pairs);
  std::vector<double> sup(cfg.ensemble_size), h1(cfg.ensemble_size), vnorm(cfg.ensemble_size);
  parallel_for(pairs, cfg.jobs, [&](std::size_t j) {
    const Trajectory a = solver.solve(members[2 * j]);
    const Trajectory b = solver.solve(members[2 * j + 1]);
    std::size_t idx = 2 * j;
    for (const Trajectory* tr : {&a, &b}) {
      double s = 0.0;
      for (const auto& st : tr->states) s = std::max(s, norm_l2(st));
      sup[idx] = s;
      h1[idx] = h1_time_norm(tr->states, tg.dt());
      vnorm[idx] = norm_h1(tr->initial());
      ++idx;
    }
    curves[j] = distance_curve(a, b);
  });

  rep.M_bound = *std::max_element(sup.begin(), sup.end());
  rep.M1_bound = *std::max_element(h1.begin(), h1.end());
  rep.Cbar = *std::max_element(vnorm.begin(), vnorm.end());
  double max_d = 0.0;
  for (const auto& c : curves) max_d = std::max(max_d, *std::max_element(c.d.begin(), c.d.end()));
  const double M = std::max(rep.M_bound, max_d * (1.0 + 1e-12));

  rep.holder = holder_fit(curves, M);
  rep.gamma_fit = rep.holder.gamma;
  rep.C1_fit = rep.holder.C1;
  for (const auto& c : curves) {
    rep.log_convexity_c = std::max(rep.log_convexity_c, log_convexity_diagnostic(c).c_min);
  }
  rep.curve = curves.front();
  rep.curve_lambda_emp = rep.holder.lambda_emp;
  rep.curve_log_q = log_convexity_diagnostic(curves.front()).log_q;

  rep.log_constants = compute_log_constants(M, rep.M1_bound, rep.C1_fit, rep.gamma_fit, tg.t_final);

  const auto probes = derivative_probes(grid, cfg.probe_basis, cfg.probe_random, cfg.seed);
  LinearisedOptions lo;
  const LinearisedOperator op(p, tg, members.front(), lo);
  rep.linearised = linearised_stability_report(op, probes, cfg.jobs);

  const std::size_t lp = std::min(cfg.lipschitz_pairs, pairs);
  std::vector<double> ratios(lp);
  parallel_for(lp, cfg.jobs, [&](std::size_t j) {
    ratios[j] = lipschitz_derivative_check(members[2 * j], members[2 * j + 1], p, tg, probes).ratio;
  });
  rep.C0 = ratios.empty() ? 0.0 : *std::max_element(ratios.begin(), ratios.end());

  const SubspaceBasis basis = build_coarse_basis(grid, cfg.subspace_modes);
  rep.subspace_dim = basis.dim();
  rep.C_Lambda = subspace_norm_ratio(basis);

  rep.chain = compute_lipschitz_chain(rep.C0, rep.linearised.Q2, rep.linearised.L, rep.C_Lambda,
                                      M, rep.log_constants.C2, rep.Cbar);
  return rep;
}

nlohmann::json to_json(const StabilityReport& r) {
  using nlohmann::json;
  auto fit_json = [](const TemplateFit& f) {
    return json{{"gamma", f.gamma}, {"C1", f.C1}, {"residual", f.residual}};
  };
  // JSON has no infinity; saturated values are written as null.
  auto num = [](double v) { return std::isfinite(v) ? json(v) : json(nullptr); };
  return json{
      {"ensemble_size", r.ensemble_size},
      {"seed", r.seed},
      {"T", r.T},
      {"M_bound", r.M_bound},
      {"M1_bound", r.M1_bound},
      {"Cbar", r.Cbar},
      {"gamma_fit", r.gamma_fit},
      {"C1_fit", r.C1_fit},
      {"holder",
       {{"template", to_string(r.holder.chosen)},
        {"M", r.holder.M},
        {"lambda1", fit_json(r.holder.lambda1)},
        {"lambda2", fit_json(r.holder.lambda2)},
        {"violations", r.holder.violations}}},
      {"log_convexity_c", r.log_convexity_c},
      {"beta", r.log_constants.beta},
      {"C2", r.log_constants.C2},
      {"epsilon_threshold", r.log_constants.eps_threshold},
      {"L", r.linearised.L},
      {"L1", r.linearised.L1},
      {"Q1", r.linearised.Q1},
      {"Q2", r.linearised.Q2},
      {"gamma_lin", r.linearised.gamma},
      {"beta_lin", r.linearised.beta},
      {"C0", r.C0},
      {"C_Lambda", r.C_Lambda},
      {"subspace_dim", r.subspace_dim},
      {"m0", r.chain.m0},
      {"log_m0", r.chain.log_m0},
      {"C_s", num(r.chain.Cs)},
      {"log_C_s", num(r.chain.log_Cs)},
      {"log_log_C_s", num(r.chain.log_log_Cs)},
      {"C_s_saturated", r.chain.saturated},
  };
}

std::string stability_curves_csv(const StabilityReport& r) {
  std::ostringstream out;
  out.precision(17);
  out << "t,d,lambda_emp,log_q\n";
  for (std::size_t i = 0; i < r.curve.times.size(); ++i) {
    out << r.curve.times[i] << ',' << r.curve.d[i] << ',' << r.curve_lambda_emp[i] << ','
        << r.curve_log_q[i] << '\n';
  }
  return out.str();
}

}  // namespace pfr
