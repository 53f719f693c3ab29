#include "pfr/discretization.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <numbers>
#include <string>

#include "pfr/error.hpp"
#include "pfr/kernels.hpp"

namespace pfr {
namespace {

// Scalar update for the Dirichlet nodes next to the boundary, where
// neighbours on the boundary read as zero.
inline double dirichlet_point(const kernels::StencilRow& s, const Grid& g, const double* c,
                              const double* down, const double* up, std::size_t i) {
  const double left = i == 1 ? 0.0 : c[i - 1];
  const double right = i + 2 == g.nx() ? 0.0 : c[i + 1];
  return s.diag * c[i] - s.cx * (left + right) - s.cy * (down[i] + up[i]);
}

}  // namespace

void apply_helmholtz(const Field& in, Field& out, Boundary bc, double diag, double kappa) {
  const Grid& g = in.grid();
  require_same_grid(g, out.grid(), "apply_helmholtz");
  const std::size_t nx = g.nx();
  const std::size_t ny = g.ny();
  const double hx = g.spacing(0);
  const double cx = kappa / (hx * hx);
  const double cy = g.dim() == 2 ? kappa / (g.spacing(1) * g.spacing(1)) : 0.0;
  const kernels::StencilRow s{diag + 2.0 * cx + 2.0 * cy, cx, cy};

  const double* c = in.data();
  double* o = out.data();
  const std::vector<double> zero_row(nx, 0.0);

  if (bc == Boundary::neumann) {
    for (std::size_t j = 0; j < ny; ++j) {
      const double* row = c + j * nx;
      const double* down = row;
      const double* up = row;
      if (ny > 1) {
        down = c + (j == 0 ? 1 : j - 1) * nx;
        up = c + (j + 1 == ny ? ny - 2 : j + 1) * nx;
      }
      double* orow = o + j * nx;
      orow[0] = s.diag * row[0] - 2.0 * s.cx * row[1] - s.cy * (down[0] + up[0]);
      kernels::stencil_row(s, row, down, up, orow, 1, nx - 1);
      orow[nx - 1] = s.diag * row[nx - 1] - 2.0 * s.cx * row[nx - 2] -
                     s.cy * (down[nx - 1] + up[nx - 1]);
    }
    return;
  }

  // Dirichlet
  const std::size_t j_begin = g.dim() == 2 ? 1 : 0;
  const std::size_t j_end = g.dim() == 2 ? ny - 1 : 1;
  if (g.dim() == 2) {
    for (std::size_t i = 0; i < nx; ++i) {
      o[i] = diag * c[i];
      o[(ny - 1) * nx + i] = diag * c[(ny - 1) * nx + i];
    }
  }
  for (std::size_t j = j_begin; j < j_end; ++j) {
    const double* row = c + j * nx;
    const double* down = zero_row.data();
    const double* up = zero_row.data();
    if (g.dim() == 2) {
      if (j > 1) down = c + (j - 1) * nx;
      if (j + 2 < ny) up = c + (j + 1) * nx;
    }
    double* orow = o + j * nx;
    orow[0] = diag * row[0];
    orow[nx - 1] = diag * row[nx - 1];
    if (nx < 3) continue;
    orow[1] = dirichlet_point(s, g, row, down, up, 1);
    if (nx - 2 > 1) orow[nx - 2] = dirichlet_point(s, g, row, down, up, nx - 2);
    if (nx > 4) kernels::stencil_row(s, row, down, up, orow, 2, nx - 2);
  }
}

Field laplacian_dirichlet(const Field& f) {
  Field out(f.grid_ptr());
  apply_helmholtz(f, out, Boundary::dirichlet, 0.0, -1.0);
  return out;
}

Field laplacian_neumann(const Field& f) {
  Field out(f.grid_ptr());
  apply_helmholtz(f, out, Boundary::neumann, 0.0, -1.0);
  return out;
}

double inner_product_l2(const Field& a, const Field& b) {
  require_same_grid(a.grid(), b.grid(), "inner_product_l2");
  return kernels::weighted_dot(a.grid().weights(), a.values(), b.values());
}

double inner_product_l2(const StateTriple& a, const StateTriple& b) {
  return inner_product_l2(a.phi, b.phi) + inner_product_l2(a.sigma, b.sigma) +
         inner_product_l2(a.psa, b.psa);
}

double norm_l2(const Field& f) { return std::sqrt(inner_product_l2(f, f)); }
double norm_l2(const StateTriple& s) { return std::sqrt(inner_product_l2(s, s)); }

double integral(const Field& f) {
  const auto w = f.grid().weights();
  double sum = 0.0;
  for (std::size_t k = 0; k < w.size(); ++k) sum += w[k] * f[k];
  return sum;
}

double inner_product_gradient(const Field& a, const Field& b) {
  const Grid& g = a.grid();
  require_same_grid(g, b.grid(), "inner_product_gradient");
  const std::size_t nx = g.nx();
  const std::size_t ny = g.ny();
  const auto wx = g.weights_x();
  const auto wy = g.weights_y();
  double sum = 0.0;
  const double hx = g.spacing(0);
  for (std::size_t j = 0; j < ny; ++j) {
    double row = 0.0;
    for (std::size_t i = 0; i + 1 < nx; ++i) {
      const std::size_t k = g.index(i, j);
      row += (a[k + 1] - a[k]) * (b[k + 1] - b[k]);
    }
    sum += row * wy[j] / hx;
  }
  if (g.dim() == 2) {
    const double hy = g.spacing(1);
    for (std::size_t j = 0; j + 1 < ny; ++j) {
      for (std::size_t i = 0; i < nx; ++i) {
        const std::size_t k = g.index(i, j);
        sum += (a[k + nx] - a[k]) * (b[k + nx] - b[k]) * wx[i] / hy;
      }
    }
  }
  return sum;
}

double gradient_norm_sq(const Field& f) { return inner_product_gradient(f, f); }

double norm_h1(const Field& f) {
  return std::sqrt(inner_product_l2(f, f) + gradient_norm_sq(f));
}

double norm_h1(const StateTriple& s) {
  double sq = 0.0;
  for (int k = 0; k < 3; ++k) {
    sq += inner_product_l2(s.slot(k), s.slot(k)) + gradient_norm_sq(s.slot(k));
  }
  return std::sqrt(sq);
}

void zero_boundary(Field& f) {
  const Grid& g = f.grid();
  for (std::size_t k = 0; k < g.size(); ++k) {
    if (g.on_boundary(k)) f[k] = 0.0;
  }
}

// ---------------------------------------------------------------------------

std::vector<double> SubspaceBasis::coefficients(const StateTriple& v) const {
  std::vector<double> c(elements.size());
  for (std::size_t i = 0; i < elements.size(); ++i) c[i] = inner_product_l2(v, elements[i]);
  return c;
}

StateTriple SubspaceBasis::combine(const std::vector<double>& coeffs) const {
  if (elements.empty()) throw InputError("subspace basis is empty");
  if (coeffs.size() != elements.size()) throw InputError("subspace: coefficient count mismatch");
  StateTriple out = StateTriple::zeros(elements.front().grid_ptr());
  for (std::size_t i = 0; i < elements.size(); ++i) out.axpy(coeffs[i], elements[i]);
  return out;
}

SubspaceBasis build_coarse_basis(const GridPtr& grid, std::size_t n_per_axis) {
  if (n_per_axis == 0) throw InputError("coarse basis: n_per_axis must be >= 1");
  for (int a = 0; a < grid->dim(); ++a) {
    if (n_per_axis + 1 > grid->cells(a)) {
      throw InputError("coarse basis: " + std::to_string(n_per_axis) +
                       " modes per axis exceed the grid's interior resolution");
    }
  }
  const double lx = grid->extent(0);
  const double ly = grid->dim() == 2 ? grid->extent(1) : 1.0;
  const std::size_t ny_modes = grid->dim() == 2 ? n_per_axis : 1;
  constexpr double pi = std::numbers::pi;

  SubspaceBasis basis;
  for (int slot = 0; slot < 3; ++slot) {
    for (std::size_t l = 0; l < ny_modes; ++l) {
      for (std::size_t k = 0; k < n_per_axis; ++k) {
        StateTriple e = StateTriple::zeros(grid);
        Field& f = e.slot(slot);
        if (slot == 0) {
          const double kx = static_cast<double>(k + 1) * pi / lx;
          const double ky = static_cast<double>(l + 1) * pi / ly;
          f = Field::from_function(grid, [&](double x, double y) {
            return std::sin(kx * x) * (grid->dim() == 2 ? std::sin(ky * y) : 1.0);
          });
          zero_boundary(f);
        } else {
          const double kx = static_cast<double>(k) * pi / lx;
          const double ky = static_cast<double>(l) * pi / ly;
          f = Field::from_function(grid, [&](double x, double y) {
            return std::cos(kx * x) * (grid->dim() == 2 ? std::cos(ky * y) : 1.0);
          });
        }
        basis.elements.push_back(std::move(e));
      }
    }
  }

  // Modified Gram-Schmidt in the product L2 inner product.
  for (std::size_t i = 0; i < basis.elements.size(); ++i) {
    StateTriple& ei = basis.elements[i];
    for (std::size_t j = 0; j < i; ++j) {
      ei.axpy(-inner_product_l2(ei, basis.elements[j]), basis.elements[j]);
    }
    const double n = norm_l2(ei);
    if (!(n > 1e-12)) throw NumericalError("coarse basis: degenerate mode during orthonormalisation");
    ei *= 1.0 / n;
  }
  return basis;
}

StateTriple project_subspace(const StateTriple& v, const SubspaceBasis& basis) {
  if (basis.elements.empty()) throw InputError("project_subspace: empty basis");
  require_same_grid(v.grid(), basis.elements.front().grid(), "project_subspace");
  return basis.combine(basis.coefficients(v));
}

double subspace_norm_ratio(const SubspaceBasis& basis) {
  const std::size_t n = basis.dim();
  if (n == 0) throw InputError("subspace_norm_ratio: empty basis");
  Eigen::MatrixXd gram(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j <= i; ++j) {
      double v = 0.0;
      for (int s = 0; s < 3; ++s) {
        const Field& a = basis.elements[i].slot(s);
        const Field& b = basis.elements[j].slot(s);
        v += inner_product_l2(a, b) + inner_product_gradient(a, b);
      }
      gram(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = v;
      gram(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) = v;
    }
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(gram, Eigen::EigenvaluesOnly);
  return std::sqrt(es.eigenvalues().maxCoeff());
}

}  // namespace pfr
