#pragma once
// Time integration of the nonlinear phase/nutrient/PSA system and the
// solution operator R: initial state -> state at T.
//
// Each step is IMEX Euler: diffusion and the linear decays gamma_h sigma and
// gamma_p p are implicit; the reactions F'(phi) - m(sigma) h'(phi),
// S_ch phi - gamma_ch sigma phi and alpha_ch phi use the old state.

#include <cstddef>
#include <functional>
#include <limits>
#include <optional>
#include <vector>

#include "pfr/grid.hpp"
#include "pfr/linear_solver.hpp"
#include "pfr/model.hpp"

namespace pfr {

struct TimeGrid {
  double t_final = 0.5;
  std::size_t n_steps = 100;
  /// Snapshots kept by solve_forward, always including t=0 and t=T.
  std::size_t n_snapshots = 32;

  double dt() const { return n_steps ? t_final / static_cast<double>(n_steps) : 0.0; }
  /// Throws InputError. n_steps == 0 is only legal with t_final == 0.
  void validate() const;
  bool operator==(const TimeGrid&) const = default;
};

struct AdmissibleBounds {
  double sigma_max = std::numeric_limits<double>::infinity();
  double psa_max = std::numeric_limits<double>::infinity();
  /// Spatially varying caps; override the constants where present.
  std::optional<Field> sigma_max_field;
  std::optional<Field> psa_max_field;
};

/// Clamps phi to [0,1] (boundary nodes to 0), sigma to [0, sigma_max] and p to
/// [0, psa_max] pointwise. Idempotent.
StateTriple project_admissible(const StateTriple& v, const AdmissibleBounds& bounds = {});
bool is_admissible(const StateTriple& v, const AdmissibleBounds& bounds = {}, double tol = 0.0);

/// Envelope of the fields over every step of a run.
struct RunMonitor {
  double phi_min = std::numeric_limits<double>::infinity();
  double phi_max = -std::numeric_limits<double>::infinity();
  double sigma_min = std::numeric_limits<double>::infinity();
  double psa_min = std::numeric_limits<double>::infinity();
  std::size_t max_cg_iterations = 0;

  /// phi left [-1e-2, 1 + 1e-2] at some step.
  bool phi_bound_violated() const { return phi_min < -1e-2 || phi_max > 1.0 + 1e-2; }
  /// sigma or p dropped below -1e-8 at some step.
  bool negativity_violated() const { return sigma_min < -1e-8 || psa_min < -1e-8; }
  void observe(const StateTriple& s);
};

struct Trajectory {
  TimeGrid time_grid;
  std::vector<std::size_t> steps;  ///< step index of each stored state
  std::vector<double> times;
  std::vector<StateTriple> states;
  RunMonitor monitor;

  std::size_t size() const { return states.size(); }
  const StateTriple& initial() const { return states.front(); }
  const StateTriple& terminal() const { return states.back(); }
};

/// Extra source terms added to the right-hand sides (manufactured solutions).
/// Called with the new time level t_{n+1}.
using SourceFn = std::function<void(double t, StateTriple& source)>;

struct ForwardOptions {
  /// Store every step instead of n_snapshots (needed by the linearisation).
  bool keep_all_steps = false;
  SourceFn source;
  CgOptions cg;
  /// Suppress parameter, step-size and admissibility warnings (inner loops).
  bool quiet = false;
};

/// Step indices of the snapshots: round(k N / (S-1)), deduplicated.
std::vector<std::size_t> snapshot_steps(const TimeGrid& tg);

class ForwardSolver {
 public:
  ForwardSolver(ModelParams params, GridPtr grid, TimeGrid tg, ForwardOptions options = {});

  /// One IMEX step from s to t_new = t_old + dt.
  StateTriple step(const StateTriple& s, double t_new) const;
  Trajectory solve(const StateTriple& s0) const;
  /// State at T without storing snapshots.
  StateTriple terminal(const StateTriple& s0) const;

  const ModelParams& params() const { return params_; }
  const TimeGrid& time_grid() const { return tg_; }
  const GridPtr& grid() const { return grid_; }
  const ImplicitOperator& phi_operator() const { return a_phi_; }
  const ImplicitOperator& sigma_operator() const { return a_sigma_; }
  const ImplicitOperator& psa_operator() const { return a_psa_; }

 private:
  ModelParams params_;
  GridPtr grid_;
  TimeGrid tg_;
  ForwardOptions options_;
  double dt_;
  ImplicitOperator a_phi_;
  ImplicitOperator a_sigma_;
  ImplicitOperator a_psa_;
  mutable std::size_t last_cg_iterations_ = 0;
};

/// Single IMEX step with freshly assembled operators.
StateTriple step(const StateTriple& s, const ModelParams& p, double dt);

Trajectory solve_forward(const StateTriple& s0, const ModelParams& p, const TimeGrid& tg,
                         const ForwardOptions& options = {});

/// R(s0) = state at T. For n_steps == 0 returns s0 unchanged.
StateTriple solution_operator_R(const StateTriple& s0, const ModelParams& p, const TimeGrid& tg);

/// Largest explicit reaction rate over phi in [0,1]; steps larger than
/// 0.5 / rate trigger a warning.
double max_reaction_rate(const ModelParams& p);

}  // namespace pfr
