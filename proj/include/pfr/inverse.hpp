#pragma once
// Backward reconstruction of the initial state from terminal data by
// projected Landweber iteration:
//   x_{k+1} = Pi_K Pi_ad (x_k + tau DR(x_k)^* [y - R(x_k)])
// with discrepancy-principle stopping.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "pfr/forward.hpp"
#include "pfr/linearised.hpp"

namespace pfr {

enum class PhantomKind { gaussian_bump, two_foci, annulus };

PhantomKind phantom_kind_from_string(const std::string& s);
std::string to_string(PhantomKind k);

struct PhantomOptions {
  /// tanh interface width.
  double width = 0.04;
  ModelParams params;
};

/// phi in [0,1] with tanh edges (shape jittered by the seed), sigma the
/// steady nutrient profile for that phi, p after one unit implicit
/// relaxation step from alpha_h/gamma_p. Deterministic in the seed.
StateTriple make_phantom(const GridPtr& grid, PhantomKind kind, std::uint64_t seed,
                         const PhantomOptions& options = {});

/// Random admissible initial datum: one to three tanh-edged tumour seeds and
/// smooth positive sigma, p around their healthy equilibria.
StateTriple random_admissible_state(const GridPtr& grid, std::uint64_t seed,
                                    const ModelParams& params = {});

/// Additive Gaussian noise with per-field standard deviation
/// level * ||field||_inf, then clipped to the admissible set. level == 0
/// returns v unchanged.
StateTriple add_noise(const StateTriple& v, double level, std::uint64_t seed,
                      const AdmissibleBounds& bounds = {});

/// Healthy-tissue state: phi = 0, sigma = S_h/gamma_h, p = alpha_h/gamma_p.
StateTriple healthy_state(const GridPtr& grid, const ModelParams& params);

/// residual <= tau_dp * delta.
bool discrepancy_stop(double residual, double delta, double tau_dp);

enum class StopReason { discrepancy, max_iter, stagnation };
std::string to_string(StopReason r);

enum class InitialGuess { healthy, zero, given };

struct ReconstructionConfig {
  /// Step size; empty selects 0.9 / ||DR(x_0)||^2.
  std::optional<double> tau;
  std::size_t max_iter = 500;
  double tau_dp = 1.1;
  double delta = 0.0;
  /// Dimension of the coarse basis (3 n^d); 0 disables the subspace.
  std::size_t subspace_dim = 0;
  AdmissibleBounds bounds;
  bool enforce_admissible = true;
  InitialGuess initial_guess = InitialGuess::healthy;
  std::optional<StateTriple> initial;
  /// Keep iterating after the discrepancy point to record the full error
  /// curve; the returned estimate is still the discrepancy iterate.
  bool continue_past_discrepancy = false;
  std::size_t stagnation_window = 10;
  double stagnation_tol = 1e-6;
  std::size_t divergence_window = 5;
  std::uint64_t power_seed = 1;
  CgOptions cg;

  /// Throws InputError.
  void validate() const;
};

struct ReconstructionResult {
  StateTriple estimate;
  /// ||R(x_k) - y|| for k = 0..iterations.
  std::vector<double> residuals;
  /// ||x_k - truth|| / ||truth|| when a truth was supplied.
  std::vector<double> errors;
  StopReason stop = StopReason::max_iter;
  /// Index of the returned iterate.
  std::size_t iterations = 0;
  double tau = 0.0;
  double operator_norm = 0.0;
  /// Relative error of the returned iterate.
  std::optional<double> final_error;
  /// Iterate with the smallest error along the recorded path.
  std::optional<std::size_t> best_iteration;
};

/// Number of modes per axis for a subspace dimension; throws when the
/// dimension is not 3 n^d.
std::size_t subspace_modes_per_axis(const Grid& grid, std::size_t dim);

/// Throws NumericalError when the residual grows divergence_window times in
/// a row by more than stagnation_tol relative overall.
ReconstructionResult landweber_reconstruct(const StateTriple& y_meas, const ModelParams& p,
                                           const TimeGrid& tg, const ReconstructionConfig& cfg,
                                           const StateTriple* truth = nullptr);

}  // namespace pfr
