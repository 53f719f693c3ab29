#include "pfr/config.hpp"

#include <cmath>
#include <fstream>
#include <set>

#include "pfr/error.hpp"

namespace pfr {

using nlohmann::json;

GridPtr GridSpec::make() const {
  const double h = length / static_cast<double>(cells);
  return dim == 1 ? Grid::make_1d(cells, h) : Grid::make_2d(cells, cells, h, h);
}

std::string to_string(InitialKind k) {
  switch (k) {
    case InitialKind::phantom: return "phantom";
    case InitialKind::random: return "random";
    case InitialKind::healthy: return "healthy";
  }
  return "?";
}

namespace {

InitialKind initial_kind_from_string(const std::string& s, const std::string& key) {
  if (s == "phantom") return InitialKind::phantom;
  if (s == "random") return InitialKind::random;
  if (s == "healthy") return InitialKind::healthy;
  throw InputError("config: '" + key + "' must be one of phantom, random, healthy (got '" + s + "')");
}

std::string to_string(InitialGuess g) {
  switch (g) {
    case InitialGuess::healthy: return "healthy";
    case InitialGuess::zero: return "zero";
    case InitialGuess::given: return "given";
  }
  return "?";
}

InitialGuess initial_guess_from_string(const std::string& s, const std::string& key) {
  if (s == "healthy") return InitialGuess::healthy;
  if (s == "zero") return InitialGuess::zero;
  throw InputError("config: '" + key + "' must be healthy or zero (got '" + s + "')");
}

// Reads one JSON object, tracking which keys were consumed.
class Reader {
 public:
  Reader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw InputError("config: '" + label() + "' must be an object");
  }

  std::string key_path(const char* key) const { return path_.empty() ? key : path_ + "." + key; }

  const json* find(const char* key, bool required) {
    seen_.insert(key);
    const auto it = j_.find(key);
    if (it == j_.end()) {
      if (required) throw InputError("config: missing required key '" + key_path(key) + "'");
      return nullptr;
    }
    return &*it;
  }

  void number(const char* key, double& out, bool required = false) {
    if (const json* v = find(key, required)) {
      if (!v->is_number()) throw InputError("config: '" + key_path(key) + "' must be a number");
      out = v->get<double>();
    }
  }

  template <class Int>
  void integer(const char* key, Int& out, bool required = false) {
    if (const json* v = find(key, required)) {
      if (!v->is_number_integer() || v->get<std::int64_t>() < 0) {
        throw InputError("config: '" + key_path(key) + "' must be a non-negative integer");
      }
      out = static_cast<Int>(v->get<std::uint64_t>());
    }
  }

  void boolean(const char* key, bool& out) {
    if (const json* v = find(key, false)) {
      if (!v->is_boolean()) throw InputError("config: '" + key_path(key) + "' must be true or false");
      out = v->get<bool>();
    }
  }

  bool string(const char* key, std::string& out) {
    if (const json* v = find(key, false)) {
      if (!v->is_string()) throw InputError("config: '" + key_path(key) + "' must be a string");
      out = v->get<std::string>();
      return true;
    }
    return false;
  }

  // Number or the string "auto" (empty optional).
  void number_or_auto(const char* key, std::optional<double>& out) {
    if (const json* v = find(key, false)) {
      if (v->is_string() && v->get<std::string>() == "auto") {
        out.reset();
      } else if (v->is_number()) {
        out = v->get<double>();
      } else {
        throw InputError("config: '" + key_path(key) + "' must be a number or \"auto\"");
      }
    }
  }

  void finish() const {
    for (const auto& [key, value] : j_.items()) {
      if (!seen_.count(key)) throw InputError("config: unknown key '" + key_path(key.c_str()) + "'");
    }
  }

 private:
  std::string label() const { return path_.empty() ? "<root>" : path_; }

  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

json number_or_auto(const std::optional<double>& v) { return v ? json(*v) : json("auto"); }

}  // namespace

void RunConfig::validate() const {
  if (grid.dim != 1 && grid.dim != 2) throw InputError("config: 'grid.dim' must be 1 or 2");
  if (grid.cells < 2) throw InputError("config: 'grid.cells' must be >= 2");
  if (!(grid.length > 0.0) || !std::isfinite(grid.length)) {
    throw InputError("config: 'grid.length' must be > 0");
  }
  model.validate();
  time.validate();
  if (!(phantom.width > 0.0)) throw InputError("config: 'phantom.width' must be > 0");
  if (!(phantom.noise_level >= 0.0) || !std::isfinite(phantom.noise_level)) {
    throw InputError("config: 'phantom.noise_level' must be >= 0");
  }
  if (reconstruct.tau && !(*reconstruct.tau > 0.0)) {
    throw InputError("config: 'reconstruct.tau' must be > 0 or \"auto\"");
  }
  if (!(reconstruct.tau_dp >= 1.0)) throw InputError("config: 'reconstruct.tau_dp' must be >= 1");
  if (reconstruct.delta && !(*reconstruct.delta >= 0.0)) {
    throw InputError("config: 'reconstruct.delta' must be >= 0 or \"auto\"");
  }
  if (reconstruct.subspace_dim > 0) {
    const GridPtr g = grid.make();
    subspace_modes_per_axis(*g, reconstruct.subspace_dim);
  }
  if (!(check.slope_min < check.slope_max)) {
    throw InputError("config: 'check.slope_min' must be below 'check.slope_max'");
  }
  if (check.directions == 0 || check.base_points == 0 || check.pairs == 0) {
    throw InputError("config: check counts must be >= 1");
  }
  if (!(check.adjoint_tol > 0.0)) throw InputError("config: 'check.adjoint_tol' must be > 0");
  if (stability.ensemble_size < 2 || stability.ensemble_size % 2 != 0) {
    throw InputError("config: 'stability.ensemble_size' must be even and >= 2");
  }
  if (stability.subspace_modes == 0) throw InputError("config: 'stability.subspace_modes' must be >= 1");
  if (stability.probe_basis + stability.probe_random == 0) {
    throw InputError("config: the stability probe set is empty");
  }
  if (output_dir.empty()) throw InputError("config: 'output_dir' must not be empty");
}

void RunConfig::override_seed(std::uint64_t seed) {
  simulate.seed = seed;
  phantom.seed = seed;
  phantom.noise_seed = seed;
  reconstruct.power_seed = seed;
  check.seed = seed;
  stability.seed = seed;
}

StabilityConfig RunConfig::stability_config(std::size_t jobs) const {
  StabilityConfig c;
  c.ensemble_size = stability.ensemble_size;
  c.seed = stability.seed;
  c.subspace_modes = stability.subspace_modes;
  c.probe_basis = stability.probe_basis;
  c.probe_random = stability.probe_random;
  c.lipschitz_pairs = stability.lipschitz_pairs;
  c.jobs = jobs;
  return c;
}

RunConfig parse_run_config(const json& j) {
  RunConfig c;
  Reader root(j, "");

  {
    Reader r(*root.find("grid", true), "grid");
    r.integer("dim", c.grid.dim, true);
    r.integer("cells", c.grid.cells, true);
    r.number("length", c.grid.length);
    r.finish();
  }
  if (const json* m = root.find("model", false)) {
    try {
      c.model = params_from_json(*m);
    } catch (const InputError& e) {
      throw InputError(std::string("config: model block: ") + e.what());
    }
  }
  {
    Reader r(*root.find("time", true), "time");
    r.number("t_final", c.time.t_final, true);
    r.integer("n_steps", c.time.n_steps, true);
    r.integer("n_snapshots", c.time.n_snapshots);
    r.finish();
  }
  if (const json* b = root.find("simulate", false)) {
    Reader r(*b, "simulate");
    std::string s;
    if (r.string("initial", s)) c.simulate.initial = initial_kind_from_string(s, "simulate.initial");
    r.integer("seed", c.simulate.seed);
    r.finish();
  }
  if (const json* b = root.find("phantom", false)) {
    Reader r(*b, "phantom");
    std::string s;
    if (r.string("kind", s)) {
      try {
        c.phantom.kind = phantom_kind_from_string(s);
      } catch (const InputError& e) {
        throw InputError(std::string("config: 'phantom.kind': ") + e.what());
      }
    }
    r.integer("seed", c.phantom.seed);
    r.number("width", c.phantom.width);
    r.number("noise_level", c.phantom.noise_level);
    r.integer("noise_seed", c.phantom.noise_seed);
    r.finish();
  }
  if (const json* b = root.find("reconstruct", false)) {
    Reader r(*b, "reconstruct");
    r.number_or_auto("tau", c.reconstruct.tau);
    r.integer("max_iter", c.reconstruct.max_iter);
    r.number("tau_dp", c.reconstruct.tau_dp);
    r.number_or_auto("delta", c.reconstruct.delta);
    r.integer("subspace_dim", c.reconstruct.subspace_dim);
    std::string s;
    if (r.string("initial_guess", s)) {
      c.reconstruct.initial_guess = initial_guess_from_string(s, "reconstruct.initial_guess");
    }
    r.boolean("enforce_admissible", c.reconstruct.enforce_admissible);
    r.boolean("continue_past_discrepancy", c.reconstruct.continue_past_discrepancy);
    r.integer("power_seed", c.reconstruct.power_seed);
    r.finish();
  }
  if (const json* b = root.find("check", false)) {
    Reader r(*b, "check");
    r.integer("seed", c.check.seed);
    r.integer("base_points", c.check.base_points);
    r.integer("directions", c.check.directions);
    r.number("slope_min", c.check.slope_min);
    r.number("slope_max", c.check.slope_max);
    r.integer("pairs", c.check.pairs);
    r.number("adjoint_tol", c.check.adjoint_tol);
    r.boolean("flip_adjoint_sign", c.check.flip_adjoint_sign);
    r.number("min_order", c.check.min_order);
    r.finish();
  }
  if (const json* b = root.find("stability", false)) {
    Reader r(*b, "stability");
    r.integer("ensemble_size", c.stability.ensemble_size);
    r.integer("seed", c.stability.seed);
    r.integer("subspace_modes", c.stability.subspace_modes);
    r.integer("probe_basis", c.stability.probe_basis);
    r.integer("probe_random", c.stability.probe_random);
    r.integer("lipschitz_pairs", c.stability.lipschitz_pairs);
    r.finish();
  }
  root.string("output_dir", c.output_dir);
  root.finish();
  c.validate();
  return c;
}

RunConfig load_run_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("config: cannot open '" + path + "'");
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw InputError("config: '" + path + "' is not valid JSON: " + e.what());
  }
  return parse_run_config(j);
}

json to_json(const RunConfig& c) {
  return json{
      {"grid", {{"dim", c.grid.dim}, {"cells", c.grid.cells}, {"length", c.grid.length}}},
      {"model", to_json(c.model)},
      {"time",
       {{"t_final", c.time.t_final},
        {"n_steps", c.time.n_steps},
        {"n_snapshots", c.time.n_snapshots}}},
      {"simulate", {{"initial", to_string(c.simulate.initial)}, {"seed", c.simulate.seed}}},
      {"phantom",
       {{"kind", to_string(c.phantom.kind)},
        {"seed", c.phantom.seed},
        {"width", c.phantom.width},
        {"noise_level", c.phantom.noise_level},
        {"noise_seed", c.phantom.noise_seed}}},
      {"reconstruct",
       {{"tau", number_or_auto(c.reconstruct.tau)},
        {"max_iter", c.reconstruct.max_iter},
        {"tau_dp", c.reconstruct.tau_dp},
        {"delta", number_or_auto(c.reconstruct.delta)},
        {"subspace_dim", c.reconstruct.subspace_dim},
        {"initial_guess", to_string(c.reconstruct.initial_guess)},
        {"enforce_admissible", c.reconstruct.enforce_admissible},
        {"continue_past_discrepancy", c.reconstruct.continue_past_discrepancy},
        {"power_seed", c.reconstruct.power_seed}}},
      {"check",
       {{"seed", c.check.seed},
        {"base_points", c.check.base_points},
        {"directions", c.check.directions},
        {"slope_min", c.check.slope_min},
        {"slope_max", c.check.slope_max},
        {"pairs", c.check.pairs},
        {"adjoint_tol", c.check.adjoint_tol},
        {"flip_adjoint_sign", c.check.flip_adjoint_sign},
        {"min_order", c.check.min_order}}},
      {"stability",
       {{"ensemble_size", c.stability.ensemble_size},
        {"seed", c.stability.seed},
        {"subspace_modes", c.stability.subspace_modes},
        {"probe_basis", c.stability.probe_basis},
        {"probe_random", c.stability.probe_random},
        {"lipschitz_pairs", c.stability.lipschitz_pairs}}},
      {"output_dir", c.output_dir},
  };
}

}  // namespace pfr
