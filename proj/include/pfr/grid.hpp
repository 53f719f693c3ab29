#pragma once
// Uniform vertex-centred grids on a rectangle [0, Lx] (x [0, Ly]) and the
// scalar/triple fields living on them.
//
// An axis with n cells carries n+1 nodes x_i = i*h. Nodes are stored
// row-major with x fastest. The discrete L2 inner product is the trapezoidal
// rule (boundary nodes carry half weight per axis), so constants integrate
// exactly to |Omega|.

#include <array>
#include <cstddef>
#include <memory>
#include <span>
#include <vector>

namespace pfr {

class Grid {
 public:
  Grid(int dim, std::array<std::size_t, 2> cells, std::array<double, 2> spacing);

  static std::shared_ptr<const Grid> make_1d(std::size_t cells, double spacing);
  static std::shared_ptr<const Grid> make_2d(std::size_t cells_x, std::size_t cells_y,
                                             double spacing_x, double spacing_y);
  /// [0,1] or [0,1]^2 with the given number of cells per axis.
  static std::shared_ptr<const Grid> unit(int dim, std::size_t cells);

  int dim() const { return dim_; }
  std::size_t cells(int axis) const { return cells_[static_cast<std::size_t>(axis)]; }
  double spacing(int axis) const { return spacing_[static_cast<std::size_t>(axis)]; }
  double extent(int axis) const { return static_cast<double>(cells(axis)) * spacing(axis); }

  std::size_t nx() const { return nx_; }
  /// 1 for one-dimensional grids.
  std::size_t ny() const { return ny_; }
  std::size_t size() const { return nx_ * ny_; }

  std::size_t index(std::size_t i, std::size_t j = 0) const { return j * nx_ + i; }
  std::size_t ix(std::size_t k) const { return k % nx_; }
  std::size_t iy(std::size_t k) const { return k / nx_; }
  double x(std::size_t k) const { return static_cast<double>(ix(k)) * spacing_[0]; }
  double y(std::size_t k) const {
    return dim_ == 2 ? static_cast<double>(iy(k)) * spacing_[1] : 0.0;
  }

  /// Trapezoidal quadrature weights, one per node.
  std::span<const double> weights() const { return weights_; }
  /// Per-axis trapezoid weights (y weights are {1} in 1D).
  std::span<const double> weights_x() const { return wx_; }
  std::span<const double> weights_y() const { return wy_; }

  bool on_boundary(std::size_t k) const;
  double volume() const;

  bool operator==(const Grid& other) const;

 private:
  int dim_;
  std::array<std::size_t, 2> cells_;
  std::array<double, 2> spacing_;
  std::size_t nx_;
  std::size_t ny_;
  std::vector<double> wx_;
  std::vector<double> wy_;
  std::vector<double> weights_;
};

using GridPtr = std::shared_ptr<const Grid>;

/// Throws InputError unless both grids describe the same discretisation.
void require_same_grid(const Grid& a, const Grid& b, const char* context);

class Field {
 public:
  Field() = default;
  explicit Field(GridPtr grid, double value = 0.0);
  Field(GridPtr grid, std::vector<double> values);

  template <class Fn>
  static Field from_function(const GridPtr& grid, Fn&& fn) {
    Field f(grid);
    for (std::size_t k = 0; k < grid->size(); ++k) f.values_[k] = fn(grid->x(k), grid->y(k));
    return f;
  }

  const Grid& grid() const { return *grid_; }
  const GridPtr& grid_ptr() const { return grid_; }
  std::size_t size() const { return values_.size(); }

  std::span<double> values() { return values_; }
  std::span<const double> values() const { return values_; }
  double* data() { return values_.data(); }
  const double* data() const { return values_.data(); }

  double& operator[](std::size_t k) { return values_[k]; }
  double operator[](std::size_t k) const { return values_[k]; }

  void fill(double v);
  /// this += a * x
  void axpy(double a, const Field& x);
  Field& operator+=(const Field& o);
  Field& operator-=(const Field& o);
  Field& operator*=(double s);

  double min() const;
  double max() const;
  double max_abs() const;
  bool all_finite() const;

  bool operator==(const Field& o) const;

 private:
  GridPtr grid_;
  std::vector<double> values_;
};

Field operator+(Field a, const Field& b);
Field operator-(Field a, const Field& b);
Field operator*(double s, Field a);

/// Phase phi, nutrient sigma and tissue PSA p on one grid. Also used for
/// perturbations and linearised states.
struct StateTriple {
  Field phi;
  Field sigma;
  Field psa;

  static StateTriple zeros(const GridPtr& grid);
  static StateTriple constant(const GridPtr& grid, double phi, double sigma, double psa);

  const GridPtr& grid_ptr() const { return phi.grid_ptr(); }
  const Grid& grid() const { return phi.grid(); }

  Field& slot(int s) { return s == 0 ? phi : (s == 1 ? sigma : psa); }
  const Field& slot(int s) const { return s == 0 ? phi : (s == 1 ? sigma : psa); }

  void axpy(double a, const StateTriple& x);
  StateTriple& operator+=(const StateTriple& o);
  StateTriple& operator-=(const StateTriple& o);
  StateTriple& operator*=(double s);

  bool all_finite() const;
  bool operator==(const StateTriple& o) const = default;
};

StateTriple operator+(StateTriple a, const StateTriple& b);
StateTriple operator-(StateTriple a, const StateTriple& b);
StateTriple operator*(double s, StateTriple a);

}  // namespace pfr
