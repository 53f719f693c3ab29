#include "pfr/grid.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "pfr/error.hpp"
#include "pfr/kernels.hpp"

namespace pfr {
namespace {

std::vector<double> trapezoid(std::size_t cells, double h) {
  std::vector<double> w(cells + 1, h);
  w.front() = 0.5 * h;
  w.back() = 0.5 * h;
  return w;
}

}  // namespace

Grid::Grid(int dim, std::array<std::size_t, 2> cells, std::array<double, 2> spacing)
    : dim_(dim), cells_(cells), spacing_(spacing) {
  if (dim != 1 && dim != 2) throw InputError("grid: dim must be 1 or 2");
  for (int a = 0; a < dim; ++a) {
    const auto ua = static_cast<std::size_t>(a);
    if (cells_[ua] < 1) throw InputError("grid: n_cells must be >= 1");
    if (!(spacing_[ua] > 0.0) || !std::isfinite(spacing_[ua])) {
      throw InputError("grid: spacing must be positive and finite");
    }
  }
  if (dim == 1) {
    cells_[1] = 0;
    spacing_[1] = 0.0;
  }
  nx_ = cells_[0] + 1;
  ny_ = dim == 2 ? cells_[1] + 1 : 1;
  wx_ = trapezoid(cells_[0], spacing_[0]);
  wy_ = dim == 2 ? trapezoid(cells_[1], spacing_[1]) : std::vector<double>{1.0};
  weights_.resize(nx_ * ny_);
  for (std::size_t j = 0; j < ny_; ++j) {
    for (std::size_t i = 0; i < nx_; ++i) weights_[index(i, j)] = wx_[i] * wy_[j];
  }
}

std::shared_ptr<const Grid> Grid::make_1d(std::size_t cells, double spacing) {
  return std::make_shared<const Grid>(1, std::array<std::size_t, 2>{cells, 0},
                                      std::array<double, 2>{spacing, 0.0});
}

std::shared_ptr<const Grid> Grid::make_2d(std::size_t cells_x, std::size_t cells_y,
                                          double spacing_x, double spacing_y) {
  return std::make_shared<const Grid>(2, std::array<std::size_t, 2>{cells_x, cells_y},
                                      std::array<double, 2>{spacing_x, spacing_y});
}

std::shared_ptr<const Grid> Grid::unit(int dim, std::size_t cells) {
  if (cells == 0) throw InputError("grid: n_cells must be >= 1");
  const double h = 1.0 / static_cast<double>(cells);
  return dim == 1 ? make_1d(cells, h) : make_2d(cells, cells, h, h);
}

bool Grid::on_boundary(std::size_t k) const {
  const std::size_t i = ix(k);
  if (i == 0 || i + 1 == nx_) return true;
  if (dim_ == 2) {
    const std::size_t j = iy(k);
    return j == 0 || j + 1 == ny_;
  }
  return false;
}

double Grid::volume() const { return dim_ == 2 ? extent(0) * extent(1) : extent(0); }

bool Grid::operator==(const Grid& o) const {
  return dim_ == o.dim_ && cells_ == o.cells_ && spacing_ == o.spacing_;
}

void require_same_grid(const Grid& a, const Grid& b, const char* context) {
  if (&a != &b && !(a == b)) throw InputError(std::string(context) + ": grid mismatch");
}

// ---------------------------------------------------------------------------

Field::Field(GridPtr grid, double value) : grid_(std::move(grid)) {
  if (!grid_) throw InputError("field: null grid");
  values_.assign(grid_->size(), value);
}

Field::Field(GridPtr grid, std::vector<double> values)
    : grid_(std::move(grid)), values_(std::move(values)) {
  if (!grid_) throw InputError("field: null grid");
  if (values_.size() != grid_->size()) throw InputError("field: value count does not match grid");
}

void Field::fill(double v) { std::fill(values_.begin(), values_.end(), v); }

void Field::axpy(double a, const Field& x) {
  require_same_grid(*grid_, *x.grid_, "field axpy");
  kernels::axpy(a, x.values_, values_);
}

Field& Field::operator+=(const Field& o) {
  axpy(1.0, o);
  return *this;
}

Field& Field::operator-=(const Field& o) {
  axpy(-1.0, o);
  return *this;
}

Field& Field::operator*=(double s) {
  for (double& v : values_) v *= s;
  return *this;
}

double Field::min() const { return *std::min_element(values_.begin(), values_.end()); }
double Field::max() const { return *std::max_element(values_.begin(), values_.end()); }

double Field::max_abs() const {
  double m = 0.0;
  for (double v : values_) m = std::max(m, std::abs(v));
  return m;
}

bool Field::all_finite() const {
  return std::all_of(values_.begin(), values_.end(), [](double v) { return std::isfinite(v); });
}

bool Field::operator==(const Field& o) const {
  if (!grid_ || !o.grid_) return grid_ == o.grid_ && values_ == o.values_;
  return *grid_ == *o.grid_ && values_ == o.values_;
}

Field operator+(Field a, const Field& b) { return a += b; }
Field operator-(Field a, const Field& b) { return a -= b; }
Field operator*(double s, Field a) { return a *= s; }

// ---------------------------------------------------------------------------

StateTriple StateTriple::zeros(const GridPtr& grid) {
  return {Field(grid), Field(grid), Field(grid)};
}

StateTriple StateTriple::constant(const GridPtr& grid, double phi, double sigma, double psa) {
  StateTriple s{Field(grid, phi), Field(grid, sigma), Field(grid, psa)};
  for (std::size_t k = 0; k < grid->size(); ++k) {
    if (grid->on_boundary(k)) s.phi[k] = 0.0;
  }
  return s;
}

void StateTriple::axpy(double a, const StateTriple& x) {
  phi.axpy(a, x.phi);
  sigma.axpy(a, x.sigma);
  psa.axpy(a, x.psa);
}

StateTriple& StateTriple::operator+=(const StateTriple& o) {
  axpy(1.0, o);
  return *this;
}

StateTriple& StateTriple::operator-=(const StateTriple& o) {
  axpy(-1.0, o);
  return *this;
}

StateTriple& StateTriple::operator*=(double s) {
  phi *= s;
  sigma *= s;
  psa *= s;
  return *this;
}

bool StateTriple::all_finite() const {
  return phi.all_finite() && sigma.all_finite() && psa.all_finite();
}

StateTriple operator+(StateTriple a, const StateTriple& b) { return a += b; }
StateTriple operator-(StateTriple a, const StateTriple& b) { return a -= b; }
StateTriple operator*(double s, StateTriple a) { return a *= s; }

}  // namespace pfr
