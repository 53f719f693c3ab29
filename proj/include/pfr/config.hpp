#pragma once
// Run configuration for the command-line tool: a strict JSON schema (unknown
// keys rejected, missing required keys named) with an exact echo.

#include <cstdint>
#include <optional>
#include <string>

#include <json.hpp>

#include "pfr/forward.hpp"
#include "pfr/inverse.hpp"
#include "pfr/model.hpp"
#include "pfr/stability.hpp"

namespace pfr {

struct GridSpec {
  int dim = 2;
  std::size_t cells = 32;
  /// Side length of the square (or interval).
  double length = 1.0;

  GridPtr make() const;
  bool operator==(const GridSpec&) const = default;
};

enum class InitialKind { phantom, random, healthy };
std::string to_string(InitialKind k);

struct SimulateBlock {
  InitialKind initial = InitialKind::phantom;
  std::uint64_t seed = 1;
  bool operator==(const SimulateBlock&) const = default;
};

struct PhantomBlock {
  PhantomKind kind = PhantomKind::gaussian_bump;
  std::uint64_t seed = 1;
  double width = 0.04;
  double noise_level = 0.0;
  std::uint64_t noise_seed = 2;
  bool operator==(const PhantomBlock&) const = default;
};

struct ReconstructBlock {
  /// Empty means "auto".
  std::optional<double> tau;
  std::size_t max_iter = 500;
  double tau_dp = 1.1;
  /// Empty means "auto": the norm of the synthetic noise actually added.
  std::optional<double> delta;
  std::size_t subspace_dim = 0;
  InitialGuess initial_guess = InitialGuess::healthy;
  bool enforce_admissible = true;
  bool continue_past_discrepancy = false;
  std::uint64_t power_seed = 1;
  bool operator==(const ReconstructBlock&) const = default;
};

struct CheckBlock {
  std::uint64_t seed = 1;
  /// Base points and directions per base point for the Taylor test.
  std::size_t base_points = 1;
  std::size_t directions = 4;
  double slope_min = 1.9;
  double slope_max = 2.1;
  /// Random pairs for the adjoint test.
  std::size_t pairs = 10;
  double adjoint_tol = 1e-8;
  /// Negative control: corrupts the adjoint sweep.
  bool flip_adjoint_sign = false;
  /// Minimum observed order for the time-convergence check.
  double min_order = 0.9;
  bool operator==(const CheckBlock&) const = default;
};

struct StabilityBlock {
  std::size_t ensemble_size = 32;
  std::uint64_t seed = 2024;
  std::size_t subspace_modes = 3;
  std::size_t probe_basis = 8;
  std::size_t probe_random = 8;
  std::size_t lipschitz_pairs = 4;
  bool operator==(const StabilityBlock&) const = default;
};

struct RunConfig {
  GridSpec grid;
  ModelParams model;
  TimeGrid time;
  SimulateBlock simulate;
  PhantomBlock phantom;
  ReconstructBlock reconstruct;
  CheckBlock check;
  StabilityBlock stability;
  std::string output_dir = "run";

  /// Throws InputError.
  void validate() const;
  /// Replaces every block seed.
  void override_seed(std::uint64_t seed);
  StabilityConfig stability_config(std::size_t jobs) const;
  bool operator==(const RunConfig&) const = default;
};

/// Required: grid.dim, grid.cells, time.t_final, time.n_steps. A "model"
/// block, when present, must list every parameter. Throws InputError naming
/// the offending key.
RunConfig parse_run_config(const nlohmann::json& j);
RunConfig load_run_config(const std::string& path);
/// Complete echo: parse_run_config(to_json(c)) == c.
nlohmann::json to_json(const RunConfig& c);

}  // namespace pfr
