#pragma once
// Discrete operators on a Grid: Laplacians for the two boundary conditions,
// L2/H1 inner products and norms, and the coarse trigonometric subspace used
// for finite-dimensional reconstructions.

#include <cstddef>
#include <vector>

#include "pfr/grid.hpp"

namespace pfr {

enum class Boundary {
  /// Homogeneous Dirichlet: boundary nodes are eliminated (held at zero).
  dirichlet,
  /// Homogeneous Neumann: mirror ghost nodes.
  neumann,
};

/// out = diag * in - kappa * Lap_bc(in), one sweep of the 3/5-point stencil.
/// For Dirichlet the boundary rows reduce to out = diag * in and boundary
/// values never enter interior rows.
void apply_helmholtz(const Field& in, Field& out, Boundary bc, double diag, double kappa);

Field laplacian_dirichlet(const Field& f);
Field laplacian_neumann(const Field& f);

double inner_product_l2(const Field& a, const Field& b);
double inner_product_l2(const StateTriple& a, const StateTriple& b);
double norm_l2(const Field& f);
double norm_l2(const StateTriple& s);
/// Trapezoid quadrature of f over the domain.
double integral(const Field& f);

/// Squared L2 norm of the forward-difference gradient, faces weighted by
/// face length times the transverse trapezoid weight.
double gradient_norm_sq(const Field& f);
double inner_product_gradient(const Field& a, const Field& b);
double norm_h1(const Field& f);
/// Product H1 norm over the three slots.
double norm_h1(const StateTriple& s);

/// Zeroes the boundary nodes of a field (the phi Dirichlet condition).
void zero_boundary(Field& f);

struct SubspaceBasis {
  std::vector<StateTriple> elements;

  std::size_t dim() const { return elements.size(); }
  /// Coordinates <v, e_i> in the discrete product L2 inner product.
  std::vector<double> coefficients(const StateTriple& v) const;
  StateTriple combine(const std::vector<double>& coeffs) const;
};

/// Tensor sine modes (phi slot) and cosine modes (sigma and psa slots), n per
/// axis, orthonormalised by modified Gram-Schmidt. Element order: all phi
/// modes, then sigma, then psa. Throws InputError when n exceeds the number
/// of interior nodes per axis.
SubspaceBasis build_coarse_basis(const GridPtr& grid, std::size_t n_per_axis);

/// Orthogonal L2 projection onto span(basis).
StateTriple project_subspace(const StateTriple& v, const SubspaceBasis& basis);

/// sup over the span of ||h||_H1 / ||h||_L2, from the largest eigenvalue of
/// the H1 Gram matrix of the (L2-orthonormal) basis.
double subspace_norm_ratio(const SubspaceBasis& basis);

}  // namespace pfr
