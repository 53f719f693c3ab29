#include "pfr/io.hpp"

#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "pfr/discretization.hpp"
#include "pfr/error.hpp"

namespace pfr::io {

static_assert(std::endian::native == std::endian::little, "PFFIELD1 I/O assumes a little-endian host");

namespace {

constexpr std::array<char, 16> kMagic = {'P', 'F', 'F', 'I', 'E', 'L', 'D', '1'};

template <class T>
void put(std::ostream& out, T v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <class T>
T get(std::istream& in, const char* what) {
  T v{};
  if (!in.read(reinterpret_cast<char*>(&v), sizeof(T))) {
    throw IoError(std::string("field file truncated while reading ") + what);
  }
  return v;
}

std::ofstream open_out(const std::filesystem::path& path, std::ios::openmode mode = {}) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, mode);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  return out;
}

std::ifstream open_in(const std::filesystem::path& path, std::ios::openmode mode = {}) {
  std::ifstream in(path, mode);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  return in;
}

GridPtr read_header(std::istream& in) {
  std::array<char, 16> magic{};
  if (!in.read(magic.data(), magic.size()) || magic != kMagic) {
    throw IoError("not a PFFIELD1 file (bad magic)");
  }
  const auto dim = get<std::uint64_t>(in, "dim");
  if (dim != 1 && dim != 2) throw IoError("field file: unsupported dimension " + std::to_string(dim));
  std::array<std::size_t, 2> cells{0, 0};
  std::array<double, 2> spacing{0.0, 0.0};
  for (std::size_t a = 0; a < dim; ++a) cells[a] = get<std::uint64_t>(in, "cells");
  for (std::size_t a = 0; a < dim; ++a) spacing[a] = get<double>(in, "spacing");
  for (std::size_t a = 0; a < dim; ++a) {
    if (cells[a] == 0 || cells[a] > (1u << 20) || !(spacing[a] > 0.0)) {
      throw IoError("field file: invalid grid header");
    }
  }
  return dim == 1 ? Grid::make_1d(cells[0], spacing[0])
                  : Grid::make_2d(cells[0], cells[1], spacing[0], spacing[1]);
}

Field read_values(std::istream& in, GridPtr grid) {
  std::vector<double> values(grid->size());
  if (!in.read(reinterpret_cast<char*>(values.data()),
               static_cast<std::streamsize>(values.size() * sizeof(double)))) {
    throw IoError("field file truncated in the data block");
  }
  if (in.peek() != std::char_traits<char>::eof()) throw IoError("field file has trailing bytes");
  return Field(std::move(grid), std::move(values));
}

std::string fmt(double v) {
  std::ostringstream s;
  s << std::setprecision(17) << v;
  return s.str();
}

}  // namespace

void write_field(std::ostream& out, const Field& f) {
  const Grid& g = f.grid();
  out.write(kMagic.data(), kMagic.size());
  put<std::uint64_t>(out, static_cast<std::uint64_t>(g.dim()));
  for (int a = 0; a < g.dim(); ++a) put<std::uint64_t>(out, g.cells(a));
  for (int a = 0; a < g.dim(); ++a) put<double>(out, g.spacing(a));
  out.write(reinterpret_cast<const char*>(f.data()),
            static_cast<std::streamsize>(f.size() * sizeof(double)));
  if (!out) throw IoError("failed writing field data");
}

void write_field(const std::filesystem::path& path, const Field& f) {
  auto out = open_out(path, std::ios::binary);
  write_field(out, f);
}

Field read_field(std::istream& in) {
  GridPtr g = read_header(in);
  return read_values(in, std::move(g));
}

Field read_field(const std::filesystem::path& path) {
  auto in = open_in(path, std::ios::binary);
  try {
    return read_field(in);
  } catch (const IoError& e) {
    throw IoError(path.string() + ": " + e.what());
  }
}

std::string slice_csv(const Field& f, int axis, std::size_t index) {
  const Grid& g = f.grid();
  std::ostringstream out;
  out << std::setprecision(17);
  if (g.dim() == 1) {
    out << "x,value\n";
    for (std::size_t i = 0; i < g.nx(); ++i) out << g.x(i) << ',' << f[i] << '\n';
    return out.str();
  }
  if (axis == 0) {
    if (index >= g.ny()) throw InputError("slice: row index out of range");
    out << "x,value\n";
    for (std::size_t i = 0; i < g.nx(); ++i) {
      const std::size_t k = g.index(i, index);
      out << g.x(k) << ',' << f[k] << '\n';
    }
  } else if (axis == 1) {
    if (index >= g.nx()) throw InputError("slice: column index out of range");
    out << "y,value\n";
    for (std::size_t j = 0; j < g.ny(); ++j) {
      const std::size_t k = g.index(index, j);
      out << g.y(k) << ',' << f[k] << '\n';
    }
  } else {
    throw InputError("slice: axis must be 0 or 1");
  }
  return out.str();
}

Metrics metrics_of(const StateTriple& s, double time) {
  Metrics m;
  m.time = time;
  m.phi_min = s.phi.min();
  m.phi_max = s.phi.max();
  m.sigma_min = s.sigma.min();
  m.sigma_max = s.sigma.max();
  m.psa_min = s.psa.min();
  m.psa_max = s.psa.max();
  m.phi_l2 = norm_l2(s.phi);
  m.sigma_l2 = norm_l2(s.sigma);
  m.psa_l2 = norm_l2(s.psa);
  m.phi_integral = integral(s.phi);
  return m;
}

std::string metrics_csv(const Trajectory& tr) {
  std::ostringstream out;
  out << "time,phi_min,phi_max,sigma_min,sigma_max,psa_min,psa_max,phi_l2,sigma_l2,psa_l2,"
         "phi_integral\n";
  for (std::size_t i = 0; i < tr.size(); ++i) {
    const Metrics m = metrics_of(tr.states[i], tr.times[i]);
    for (double v : {m.time, m.phi_min, m.phi_max, m.sigma_min, m.sigma_max, m.psa_min, m.psa_max,
                     m.phi_l2, m.sigma_l2, m.psa_l2}) {
      out << fmt(v) << ',';
    }
    out << fmt(m.phi_integral) << '\n';
  }
  return out.str();
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  auto out = open_out(path, std::ios::binary);
  out << text;
  if (!out) throw IoError("failed writing '" + path.string() + "'");
}

void write_json(const std::filesystem::path& path, const nlohmann::json& j) {
  write_text(path, j.dump(2) + "\n");
}

nlohmann::json read_json(const std::filesystem::path& path) {
  auto in = open_in(path);
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw InputError(path.string() + ": " + e.what());
  }
}

void write_state(const std::filesystem::path& dir, const StateTriple& s) {
  write_field(dir / "phi.pff", s.phi);
  write_field(dir / "sigma.pff", s.sigma);
  write_field(dir / "psa.pff", s.psa);
}

StateTriple read_state(const std::filesystem::path& dir) {
  const Field phi = read_field(dir / "phi.pff");
  const GridPtr& g = phi.grid_ptr();
  auto on_grid = [&](const char* name) {
    const Field f = read_field(dir / name);
    if (!(f.grid() == *g)) throw IoError(std::string(name) + ": grid differs from phi.pff");
    return Field(g, std::vector<double>(f.values().begin(), f.values().end()));
  };
  return {phi, on_grid("sigma.pff"), on_grid("psa.pff")};
}

void write_trajectory(const std::filesystem::path& dir, const Trajectory& tr) {
  static constexpr std::array<const char*, 3> names = {"phi", "sigma", "psa"};
  for (std::size_t i = 0; i < tr.size(); ++i) {
    for (int s = 0; s < 3; ++s) {
      write_field(dir / "fields" / names[static_cast<std::size_t>(s)] /
                      ("t_" + std::to_string(i) + ".pff"),
                  tr.states[i].slot(s));
    }
  }
  write_text(dir / "metrics.csv", metrics_csv(tr));
}

}  // namespace pfr::io
