#pragma once
// On-disk artifacts: the PFFIELD1 binary field format, CSV slices, per
// snapshot metrics and run directories.
//
// PFFIELD1 layout (little-endian): 16-byte ASCII magic "PFFIELD1" padded
// with NUL, u64 dim, u64 cells per axis, f64 spacing per axis, then the
// node values as f64 in row-major order (x fastest).

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "pfr/forward.hpp"

namespace pfr::io {

void write_field(std::ostream& out, const Field& f);
void write_field(const std::filesystem::path& path, const Field& f);
/// Throws IoError on bad magic, truncated data or an unsupported dimension.
Field read_field(std::istream& in);
Field read_field(const std::filesystem::path& path);

/// CSV "x,value" along one grid line: axis 0 at row `index`, axis 1 at
/// column `index`. A 1D field is exported whole.
std::string slice_csv(const Field& f, int axis = 0, std::size_t index = 0);

struct Metrics {
  double time = 0.0;
  double phi_min = 0.0, phi_max = 0.0;
  double sigma_min = 0.0, sigma_max = 0.0;
  double psa_min = 0.0, psa_max = 0.0;
  double phi_l2 = 0.0, sigma_l2 = 0.0, psa_l2 = 0.0;
  double phi_integral = 0.0;
};

Metrics metrics_of(const StateTriple& s, double time);
std::string metrics_csv(const Trajectory& tr);

void write_text(const std::filesystem::path& path, const std::string& text);
void write_json(const std::filesystem::path& path, const nlohmann::json& j);
nlohmann::json read_json(const std::filesystem::path& path);

/// Writes the three fields of a state as <dir>/<var>.pff.
void write_state(const std::filesystem::path& dir, const StateTriple& s);
/// Reads <dir>/{phi,sigma,psa}.pff; the three grids must agree.
StateTriple read_state(const std::filesystem::path& dir);

/// fields/<var>/t_<index>.pff for every stored state plus metrics.csv.
void write_trajectory(const std::filesystem::path& dir, const Trajectory& tr);

}  // namespace pfr::io
