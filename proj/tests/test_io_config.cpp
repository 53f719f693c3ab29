#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "pfr/config.hpp"
#include "pfr/error.hpp"
#include "pfr/inverse.hpp"
#include "pfr/io.hpp"
#include "pfr/log.hpp"

using namespace pfr;
namespace fs = std::filesystem;

namespace {

struct Quiet {
  Quiet() { log::set_level(log::Level::error); }
} quiet;

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("pfr_test_" + name);
  fs::remove_all(p);
  return p;
}

nlohmann::json minimal() {
  return {{"grid", {{"dim", 2}, {"cells", 16}}}, {"time", {{"t_final", 0.2}, {"n_steps", 20}}}};
}

}  // namespace

TEST_CASE("PFFIELD1 byte layout") {
  const auto g = Grid::make_2d(2, 1, 0.5, 1.0);
  Field f(g);
  for (std::size_t k = 0; k < f.size(); ++k) f[k] = static_cast<double>(k) + 0.25;
  std::ostringstream out;
  io::write_field(out, f);
  const std::string b = out.str();
  REQUIRE(b.size() == 16 + 8 + 2 * 8 + 2 * 8 + 6 * 8);
  CHECK(b.substr(0, 8) == "PFFIELD1");
  for (int i = 8; i < 16; ++i) CHECK(b[static_cast<std::size_t>(i)] == '\0');
  auto u64 = [&](std::size_t off) {
    std::uint64_t v = 0;
    for (int i = 7; i >= 0; --i) v = (v << 8) | static_cast<unsigned char>(b[off + static_cast<std::size_t>(i)]);
    return v;
  };
  auto f64 = [&](std::size_t off) {
    const std::uint64_t bits = u64(off);
    double d;
    std::memcpy(&d, &bits, 8);
    return d;
  };
  CHECK(u64(16) == 2);
  CHECK(u64(24) == 2);
  CHECK(u64(32) == 1);
  CHECK(f64(40) == 0.5);
  CHECK(f64(48) == 1.0);
  // Row-major, x fastest: node (i=1, j=0) is the second value.
  CHECK(f64(56) == 0.25);
  CHECK(f64(64) == f[g->index(1, 0)]);
  CHECK(f64(56 + 5 * 8) == 5.25);

  std::istringstream in(b);
  const Field r = io::read_field(in);
  CHECK(r == f);
}

TEST_CASE("field round trip and malformed files") {
  const auto g = Grid::unit(1, 7);
  const Field f = Field::from_function(g, [](double x, double) { return x * x - 0.1; });
  const fs::path dir = scratch("fields");
  io::write_field(dir / "a.pff", f);
  CHECK(io::read_field(dir / "a.pff") == f);

  std::ostringstream out;
  io::write_field(out, f);
  std::string bytes = out.str();
  std::istringstream truncated(bytes.substr(0, bytes.size() - 3));
  CHECK_THROWS_AS(io::read_field(truncated), IoError);
  std::string bad = bytes;
  bad[0] = 'X';
  std::istringstream bad_magic(bad);
  CHECK_THROWS_AS(io::read_field(bad_magic), IoError);
  std::istringstream trailing(bytes + "x");
  CHECK_THROWS_AS(io::read_field(trailing), IoError);
  CHECK_THROWS_AS(io::read_field(dir / "missing.pff"), IoError);

  const StateTriple s = random_admissible_state(Grid::unit(2, 9), 3);
  io::write_state(dir / "state", s);
  const StateTriple back = io::read_state(dir / "state");
  CHECK(back == s);
  fs::remove_all(dir);
}

TEST_CASE("CSV slice and metrics") {
  const auto g = Grid::unit(2, 4);
  const Field f = Field::from_function(g, [](double x, double y) { return x + 10.0 * y; });
  const std::string row = io::slice_csv(f, 0, 2);
  CHECK(row.rfind("x,value\n0,5\n0.25,5.25\n", 0) == 0);
  const std::string col = io::slice_csv(f, 1, 4);
  CHECK(col.rfind("y,value\n0,1\n0.25,3.5\n", 0) == 0);
  CHECK_THROWS_AS(io::slice_csv(f, 0, 5), InputError);

  const StateTriple s = StateTriple::constant(g, 0.5, 2.0, 3.0);
  const io::Metrics m = io::metrics_of(s, 0.1);
  // phi carries the Dirichlet zero on the boundary: 3 x 3 interior nodes of weight 1/16.
  CHECK(m.phi_min == 0.0);
  CHECK(m.phi_max == 0.5);
  CHECK(m.psa_max == 3.0);
  CHECK(m.sigma_l2 == doctest::Approx(2.0));
  CHECK(m.phi_integral == doctest::Approx(9.0 / 16.0 * 0.5));

  const Trajectory tr = solve_forward(s, ModelParams{}, {0.1, 10, 3});
  const std::string csv = io::metrics_csv(tr);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 4);
  CHECK(csv.rfind("time,phi_min,phi_max,sigma_min,sigma_max,psa_min,psa_max,phi_l2,sigma_l2,psa_l2,"
                  "phi_integral\n",
                  0) == 0);

  const fs::path dir = scratch("traj");
  io::write_trajectory(dir, tr);
  CHECK(fs::exists(dir / "metrics.csv"));
  CHECK(io::read_field(dir / "fields" / "sigma" / "t_2.pff") == tr.states[2].sigma);
  fs::remove_all(dir);
}

TEST_CASE("run config: defaults, echo round trip, seed override") {
  const RunConfig c = parse_run_config(minimal());
  CHECK(c.grid.cells == 16);
  CHECK(c.time.t_final == 0.2);
  CHECK(c.model == ModelParams{});
  CHECK_FALSE(c.reconstruct.tau.has_value());
  CHECK(parse_run_config(to_json(c)) == c);

  RunConfig d = c;
  d.reconstruct.tau = 0.123456789012345;
  d.reconstruct.delta = 1e-3;
  d.reconstruct.subspace_dim = 27;
  d.phantom.kind = PhantomKind::annulus;
  d.simulate.initial = InitialKind::random;
  d.model.eta = 0.1 + 1e-16;
  d.check.flip_adjoint_sign = true;
  d.output_dir = "elsewhere";
  CHECK(parse_run_config(to_json(d)) == d);
  CHECK(to_json(parse_run_config(to_json(d))).dump() == to_json(d).dump());

  d.override_seed(99);
  CHECK(d.phantom.seed == 99);
  CHECK(d.stability.seed == 99);
  CHECK(d.stability_config(3).jobs == 3);
}

TEST_CASE("run config: schema errors name the key") {
  auto message = [](const nlohmann::json& j) {
    try {
      parse_run_config(j);
    } catch (const InputError& e) {
      return std::string(e.what());
    }
    return std::string("no error");
  };
  nlohmann::json j = minimal();
  j["time"].erase("n_steps");
  CHECK(message(j).find("'time.n_steps'") != std::string::npos);

  j = minimal();
  j.erase("grid");
  CHECK(message(j).find("'grid'") != std::string::npos);

  j = minimal();
  j["grid"]["spacing"] = 0.1;
  CHECK(message(j).find("unknown key 'grid.spacing'") != std::string::npos);

  j = minimal();
  j["colour"] = "red";
  CHECK(message(j).find("unknown key 'colour'") != std::string::npos);

  j = minimal();
  j["model"] = {{"eta", 0.1}};
  CHECK(message(j).find("missing required key") != std::string::npos);

  j = minimal();
  j["grid"]["cells"] = -3;
  CHECK(message(j).find("'grid.cells'") != std::string::npos);

  j = minimal();
  j["reconstruct"] = {{"tau", "fast"}};
  CHECK(message(j).find("'reconstruct.tau'") != std::string::npos);

  j = minimal();
  j["reconstruct"] = {{"subspace_dim", 10}};
  CHECK(message(j).find("subspace dimension") != std::string::npos);

  j = minimal();
  j["phantom"] = {{"kind", "cube"}};
  CHECK(message(j).find("phantom.kind") != std::string::npos);

  CHECK_THROWS_AS(load_run_config("/nonexistent/config.json"), InputError);
}
