#pragma once

#include <cstddef>
#include <functional>

#include "pfr/discretization.hpp"

namespace pfr {

struct CgOptions {
  /// Absolute bound on the L2-quadrature residual norm.
  double abs_tol = 1e-10;
  /// Relative bound ||r|| <= rel_tol * ||b||; the tighter of the two applies.
  double rel_tol = 1e-13;
  /// 0 selects 10 * unknowns.
  std::size_t max_iter = 0;
};

struct CgResult {
  std::size_t iterations = 0;
  double residual = 0.0;
};

/// CG in the L2 quadrature inner product for an operator that is
/// self-adjoint and positive definite in that inner product. x holds the
/// initial guess on entry.
using ApplyFn = std::function<void(const Field& in, Field& out)>;
CgResult cg_solve(const ApplyFn& apply, const Field& rhs, Field& x, const CgOptions& options);

/// The SPD operator A = diag - kappa * Lap_bc used by each implicit step,
/// with diag > 0 and kappa >= 0. A is self-adjoint in the discrete L2 inner
/// product, so CG runs in that inner product.
class ImplicitOperator {
 public:
  ImplicitOperator(GridPtr grid, Boundary bc, double diag, double kappa, CgOptions options = {});

  void apply(const Field& x, Field& out) const;

  /// Solves A x = rhs; x holds the initial guess on entry. Throws
  /// NumericalError (with the residual) when the iteration cap is reached
  /// before the absolute tolerance. Allocates its own workspace, so
  /// concurrent calls on one instance are safe.
  CgResult solve(const Field& rhs, Field& x) const;

  Boundary boundary() const { return bc_; }
  double diag() const { return diag_; }
  double kappa() const { return kappa_; }

 private:
  GridPtr grid_;
  Boundary bc_;
  double diag_;
  double kappa_;
  CgOptions options_;
};

}  // namespace pfr
