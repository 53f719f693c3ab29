#pragma once
// Subcommands of the pfr tool. Each is a pure function of the run
// configuration to files under the output directory and returns the
// process exit code.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

#include "pfr/config.hpp"

namespace pfr::cli {

enum ExitCode : int { ok = 0, check_failed = 1, config_error = 2, numerical_failure = 3 };

struct CommandOptions {
  /// Overrides the configured output directory.
  std::optional<std::filesystem::path> out;
  std::size_t jobs = 1;
  std::optional<std::uint64_t> seed_override;
};

enum class CheckKind { taylor, adjoint, opnorm, convergence };
CheckKind check_kind_from_string(const std::string& s);
std::string to_string(CheckKind k);

/// config.json echo, fields/<var>/t_<index>.pff, metrics.csv, summary.json.
int cmd_simulate(const RunConfig& cfg, const CommandOptions& opts);
/// truth/*.pff, measurement/*.pff (terminal state plus noise), phi slice CSVs.
int cmd_phantom(const RunConfig& cfg, const CommandOptions& opts);
/// check_<kind>.json; exit 1 when the threshold fails.
int cmd_check(const RunConfig& cfg, CheckKind kind, const CommandOptions& opts);
/// result/*.pff, history.csv, summary.json.
int cmd_reconstruct(const RunConfig& cfg, const CommandOptions& opts);
/// stability_report.json, stability_curves.csv.
int cmd_stability(const RunConfig& cfg, const CommandOptions& opts);

/// Loads the config, applies the seed override and dispatches; maps
/// InputError/IoError to exit 2 and NumericalError to exit 3.
int run_command(const std::string& command, const std::string& config_path,
                const std::optional<std::string>& check, const CommandOptions& opts);

}  // namespace pfr::cli
