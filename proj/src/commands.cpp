#include "pfr/commands.hpp"

#include <cmath>
#include <iostream>
#include <limits>
#include <sstream>

#include "pfr/discretization.hpp"
#include "pfr/error.hpp"
#include "pfr/io.hpp"
#include "pfr/linearised.hpp"
#include "pfr/log.hpp"
#include "pfr/parallel.hpp"

namespace pfr::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

fs::path out_dir(const RunConfig& cfg, const CommandOptions& opts) {
  const fs::path dir = opts.out ? *opts.out : fs::path(cfg.output_dir);
  fs::create_directories(dir);
  io::write_json(dir / "config.json", to_json(cfg));
  return dir;
}

PhantomOptions phantom_options(const RunConfig& cfg) {
  PhantomOptions po;
  po.width = cfg.phantom.width;
  po.params = cfg.model;
  return po;
}

StateTriple truth_state(const RunConfig& cfg, const GridPtr& g) {
  return make_phantom(g, cfg.phantom.kind, cfg.phantom.seed, phantom_options(cfg));
}

StateTriple initial_state(const RunConfig& cfg, const GridPtr& g) {
  switch (cfg.simulate.initial) {
    case InitialKind::phantom:
      return make_phantom(g, cfg.phantom.kind, cfg.simulate.seed, phantom_options(cfg));
    case InitialKind::random: return random_admissible_state(g, cfg.simulate.seed, cfg.model);
    case InitialKind::healthy: return healthy_state(g, cfg.model);
  }
  throw InputError("unknown initial state kind");
}

void write_slices(const fs::path& dir, const StateTriple& s) {
  const Grid& g = s.grid();
  const std::size_t mid = g.dim() == 2 ? g.ny() / 2 : 0;
  io::write_text(dir / "phi_slice.csv", io::slice_csv(s.phi, 0, mid));
  io::write_text(dir / "sigma_slice.csv", io::slice_csv(s.sigma, 0, mid));
  io::write_text(dir / "psa_slice.csv", io::slice_csv(s.psa, 0, mid));
}

json monitor_json(const RunMonitor& m) {
  return json{{"phi_min", m.phi_min},
              {"phi_max", m.phi_max},
              {"sigma_min", m.sigma_min},
              {"psa_min", m.psa_min},
              {"max_cg_iterations", m.max_cg_iterations},
              {"phi_bound_violated", m.phi_bound_violated()},
              {"negativity_violated", m.negativity_violated()}};
}

}  // namespace

CheckKind check_kind_from_string(const std::string& s) {
  if (s == "taylor") return CheckKind::taylor;
  if (s == "adjoint") return CheckKind::adjoint;
  if (s == "opnorm") return CheckKind::opnorm;
  if (s == "convergence") return CheckKind::convergence;
  throw InputError("unknown check '" + s + "' (taylor, adjoint, opnorm, convergence)");
}

std::string to_string(CheckKind k) {
  switch (k) {
    case CheckKind::taylor: return "taylor";
    case CheckKind::adjoint: return "adjoint";
    case CheckKind::opnorm: return "opnorm";
    case CheckKind::convergence: return "convergence";
  }
  return "?";
}

int cmd_simulate(const RunConfig& cfg, const CommandOptions& opts) {
  const fs::path dir = out_dir(cfg, opts);
  const GridPtr g = cfg.grid.make();
  const StateTriple s0 = initial_state(cfg, g);
  const Trajectory tr = ForwardSolver(cfg.model, g, cfg.time).solve(s0);
  io::write_trajectory(dir, tr);
  write_slices(dir, tr.terminal());
  io::write_json(dir / "summary.json",
                 json{{"t_final", cfg.time.t_final},
                      {"n_steps", cfg.time.n_steps},
                      {"snapshots", tr.size()},
                      {"monitor", monitor_json(tr.monitor)}});
  return ok;
}

int cmd_phantom(const RunConfig& cfg, const CommandOptions& opts) {
  const fs::path dir = out_dir(cfg, opts);
  const GridPtr g = cfg.grid.make();
  const StateTriple truth = truth_state(cfg, g);
  io::write_state(dir / "truth", truth);
  write_slices(dir / "truth", truth);
  const StateTriple clean = solution_operator_R(truth, cfg.model, cfg.time);
  const StateTriple y = add_noise(clean, cfg.phantom.noise_level, cfg.phantom.noise_seed);
  io::write_state(dir / "measurement", y);
  write_slices(dir / "measurement", y);
  io::write_json(dir / "summary.json",
                 json{{"kind", to_string(cfg.phantom.kind)},
                      {"seed", cfg.phantom.seed},
                      {"noise_level", cfg.phantom.noise_level},
                      {"noise_norm", norm_l2(y - clean)},
                      {"truth_norm", norm_l2(truth)}});
  return ok;
}

int cmd_check(const RunConfig& cfg, CheckKind kind, const CommandOptions& opts) {
  const fs::path dir = out_dir(cfg, opts);
  const GridPtr g = cfg.grid.make();
  const CheckBlock& c = cfg.check;
  LinearisedOptions lo;
  lo.flip_adjoint_sign = c.flip_adjoint_sign;

  json report;
  bool pass = false;
  std::string metric;
  switch (kind) {
    case CheckKind::taylor: {
      std::vector<std::vector<double>> slopes(c.base_points);
      parallel_for(c.base_points, opts.jobs, [&](std::size_t b) {
        const LinearisedOperator op(cfg.model, cfg.time, random_admissible_state(g, c.seed + b, cfg.model), lo);
        for (const auto& h : derivative_probes(g, 0, c.directions, c.seed + 1000 + b)) {
          slopes[b].push_back(taylor_test(op, h).slope);
        }
      });
      std::vector<double> all;
      for (const auto& s : slopes) all.insert(all.end(), s.begin(), s.end());
      pass = true;
      for (double s : all) pass = pass && s >= c.slope_min && s <= c.slope_max;
      report = derivative_report_json(all, kNaN, kNaN);
      std::ostringstream m;
      m << "taylor slopes in [" << *std::min_element(all.begin(), all.end()) << ", "
        << *std::max_element(all.begin(), all.end()) << "], required [" << c.slope_min << ", "
        << c.slope_max << "]";
      metric = m.str();
      break;
    }
    case CheckKind::adjoint: {
      const LinearisedOperator op(cfg.model, cfg.time, random_admissible_state(g, c.seed, cfg.model), lo);
      const double mismatch = adjoint_test(op, c.pairs, c.seed).max_mismatch;
      pass = mismatch < c.adjoint_tol;
      report = derivative_report_json({}, mismatch, kNaN);
      std::ostringstream m;
      m << "adjoint mismatch " << mismatch << ", required < " << c.adjoint_tol;
      metric = m.str();
      break;
    }
    case CheckKind::opnorm: {
      const LinearisedOperator op(cfg.model, cfg.time, random_admissible_state(g, c.seed, cfg.model), lo);
      PowerOptions po;
      po.seed = c.seed;
      const NormEstimate n = estimate_operator_norm(op, po);
      pass = n.converged && n.norm > 0.0 && std::isfinite(n.norm);
      report = derivative_report_json({}, kNaN, n.norm);
      report["power_iterations"] = n.iterations;
      std::ostringstream m;
      m << "operator norm " << n.norm << (n.converged ? " (converged)" : " (not converged)");
      metric = m.str();
      break;
    }
    case CheckKind::convergence: {
      const StateTriple s0 = random_admissible_state(g, c.seed, cfg.model);
      TimeGrid t1 = cfg.time, t2 = cfg.time, t4 = cfg.time;
      t2.n_steps *= 2;
      t4.n_steps *= 4;
      const StateTriple r1 = solution_operator_R(s0, cfg.model, t1);
      const StateTriple r2 = solution_operator_R(s0, cfg.model, t2);
      const StateTriple r4 = solution_operator_R(s0, cfg.model, t4);
      const double e1 = norm_l2(r1 - r2), e2 = norm_l2(r2 - r4);
      const double order = std::log2(e1 / e2);
      pass = std::isfinite(order) && order >= c.min_order;
      report = json{{"time_self_convergence", {{"differences", {e1, e2}}, {"order", order}}}};
      std::ostringstream m;
      m << "time order " << order << ", required >= " << c.min_order;
      metric = m.str();
      break;
    }
  }
  report["check"] = to_string(kind);
  report["pass"] = pass;
  report["metric"] = metric;
  report["seed"] = c.seed;
  io::write_json(dir / ("check_" + to_string(kind) + ".json"), report);
  std::cout << to_string(kind) << ": " << (pass ? "PASS" : "FAIL") << " (" << metric << ")\n";
  return pass ? ok : check_failed;
}

int cmd_reconstruct(const RunConfig& cfg, const CommandOptions& opts) {
  const fs::path dir = out_dir(cfg, opts);
  const GridPtr g = cfg.grid.make();
  const StateTriple truth = truth_state(cfg, g);
  const StateTriple clean = solution_operator_R(truth, cfg.model, cfg.time);
  const StateTriple y = add_noise(clean, cfg.phantom.noise_level, cfg.phantom.noise_seed);

  const ReconstructBlock& b = cfg.reconstruct;
  ReconstructionConfig rc;
  rc.tau = b.tau;
  rc.max_iter = b.max_iter;
  rc.tau_dp = b.tau_dp;
  rc.delta = b.delta ? *b.delta : norm_l2(y - clean);
  rc.subspace_dim = b.subspace_dim;
  rc.initial_guess = b.initial_guess;
  rc.enforce_admissible = b.enforce_admissible;
  rc.continue_past_discrepancy = b.continue_past_discrepancy;
  rc.power_seed = b.power_seed;
  const ReconstructionResult r = landweber_reconstruct(y, cfg.model, cfg.time, rc, &truth);

  io::write_state(dir / "result", r.estimate);
  write_slices(dir / "result", r.estimate);
  std::ostringstream hist;
  hist.precision(17);
  hist << "iter,residual,error_vs_truth\n";
  for (std::size_t k = 0; k < r.residuals.size(); ++k) {
    hist << k << ',' << r.residuals[k] << ',' << r.errors[k] << '\n';
  }
  io::write_text(dir / "history.csv", hist.str());
  io::write_json(dir / "summary.json",
                 json{{"stop_reason", to_string(r.stop)},
                      {"iterations", r.iterations},
                      {"recorded_iterations", r.residuals.size() - 1},
                      {"final_residual", r.residuals[r.iterations]},
                      {"final_error", *r.final_error},
                      {"best_iteration", *r.best_iteration},
                      {"best_error", r.errors[*r.best_iteration]},
                      {"delta", rc.delta},
                      {"tau", r.tau},
                      {"operator_norm", r.operator_norm},
                      {"config", to_json(cfg)}});
  std::cout << "stop: " << to_string(r.stop) << " after " << r.iterations
            << " iterations, relative error " << *r.final_error << "\n";
  return ok;
}

int cmd_stability(const RunConfig& cfg, const CommandOptions& opts) {
  const fs::path dir = out_dir(cfg, opts);
  const GridPtr g = cfg.grid.make();
  const StabilityReport r = compute_stability_report(cfg.model, g, cfg.time, cfg.stability_config(opts.jobs));
  io::write_json(dir / "stability_report.json", to_json(r));
  io::write_text(dir / "stability_curves.csv", stability_curves_csv(r));
  std::cout << "C1 " << r.C1_fit << ", gamma " << r.gamma_fit << ", C2 " << r.log_constants.C2
            << ", log log C_s " << r.chain.log_log_Cs << "\n";
  return ok;
}

int run_command(const std::string& command, const std::string& config_path,
                const std::optional<std::string>& check, const CommandOptions& opts) {
  try {
    RunConfig cfg = load_run_config(config_path);
    if (opts.seed_override) cfg.override_seed(*opts.seed_override);
    if (opts.jobs == 0) throw InputError("--jobs must be >= 1");
    if (command == "simulate") return cmd_simulate(cfg, opts);
    if (command == "phantom") return cmd_phantom(cfg, opts);
    if (command == "reconstruct") return cmd_reconstruct(cfg, opts);
    if (command == "stability") return cmd_stability(cfg, opts);
    if (command == "check") {
      if (!check) throw InputError("check needs one of taylor, adjoint, opnorm, convergence");
      return cmd_check(cfg, check_kind_from_string(*check), opts);
    }
    throw InputError("unknown command '" + command + "'");
  } catch (const NumericalError& e) {
    log::error(std::string("numerical failure: ") + e.what());
    return numerical_failure;
  } catch (const InputError& e) {
    log::error(std::string("config error: ") + e.what());
    return config_error;
  } catch (const IoError& e) {
    log::error(std::string("i/o error: ") + e.what());
    return config_error;
  } catch (const fs::filesystem_error& e) {
    log::error(std::string("i/o error: ") + e.what());
    return config_error;
  }
}

}  // namespace pfr::cli
