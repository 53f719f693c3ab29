#include <CLI11.hpp>

#include <cstdint>
#include <optional>
#include <string>

#include "pfr/commands.hpp"
#include "pfr/kernels.hpp"
#include "pfr/log.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Phase-field tumour model: simulation, derivative checks, backward reconstruction "
               "and stability reports"};
  app.require_subcommand(1);
  app.fallthrough();

  std::string config;
  std::string out;
  std::size_t jobs = 1;
  std::uint64_t seed = 0;
  bool verbose = false;
  app.add_option("--config", config, "run configuration (JSON)")->required()->check(CLI::ExistingFile);
  auto* out_opt = app.add_option("--out", out, "output directory (overrides output_dir)");
  app.add_option("--jobs", jobs, "worker threads")->check(CLI::PositiveNumber);
  auto* seed_opt = app.add_option("--seed-override", seed, "replace every seed in the config");
  app.add_flag("-v,--verbose", verbose, "log progress messages");

  std::string check_kind;
  app.add_subcommand("simulate", "forward run: fields, metrics.csv, summary.json");
  app.add_subcommand("phantom", "synthetic truth and noisy terminal measurement");
  auto* check = app.add_subcommand("check", "derivative and solver diagnostics");
  check->add_option("which", check_kind, "taylor | adjoint | opnorm | convergence")
      ->required()
      ->check(CLI::IsMember({"taylor", "adjoint", "opnorm", "convergence"}));
  app.add_subcommand("reconstruct", "Landweber reconstruction of the initial state");
  app.add_subcommand("stability", "stability constants and curves");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? pfr::cli::ok : pfr::cli::config_error;
  }

  if (verbose) pfr::log::set_level(pfr::log::Level::info);
  pfr::log::info("kernels: " + std::string(pfr::kernels::isa_name(pfr::kernels::active_isa())));

  pfr::cli::CommandOptions opts;
  if (*out_opt) opts.out = out;
  opts.jobs = jobs;
  if (*seed_opt) opts.seed_override = seed;
  const std::string command = app.get_subcommands().front()->get_name();
  std::optional<std::string> which;
  if (command == "check") which = check_kind;
  return pfr::cli::run_command(command, config, which, opts);
}
