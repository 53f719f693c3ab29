#include "pfr/linear_solver.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "pfr/error.hpp"
#include "pfr/kernels.hpp"

namespace pfr {

ImplicitOperator::ImplicitOperator(GridPtr grid, Boundary bc, double diag, double kappa,
                                   CgOptions options)
    : grid_(std::move(grid)), bc_(bc), diag_(diag), kappa_(kappa), options_(options) {
  if (!(diag_ > 0.0) || !(kappa_ >= 0.0)) {
    throw InputError("implicit operator: need diag > 0 and kappa >= 0");
  }
}

void ImplicitOperator::apply(const Field& x, Field& out) const {
  apply_helmholtz(x, out, bc_, diag_, kappa_);
}

CgResult ImplicitOperator::solve(const Field& rhs, Field& x) const {
  require_same_grid(*grid_, rhs.grid(), "implicit solve");
  require_same_grid(*grid_, x.grid(), "implicit solve");
  return cg_solve([this](const Field& in, Field& out) { apply(in, out); }, rhs, x, options_);
}

CgResult cg_solve(const ApplyFn& apply, const Field& rhs, Field& x, const CgOptions& options) {
  require_same_grid(rhs.grid(), x.grid(), "cg_solve");
  const GridPtr& grid = rhs.grid_ptr();
  const auto w = grid->weights();
  const std::size_t n = grid->size();
  const std::size_t cap = options.max_iter ? options.max_iter : 10 * n;

  const double bnorm = std::sqrt(kernels::weighted_dot(w, rhs.values(), rhs.values()));
  if (bnorm == 0.0) {
    x.fill(0.0);
    return {};
  }
  const double tol = std::min(options.abs_tol, options.rel_tol * bnorm);

  Field r(grid);
  apply(x, r);
  kernels::axpby(1.0, rhs.values(), -1.0, r.values());  // r = b - A x
  Field p = r;
  Field ap(grid);
  double rr = kernels::weighted_dot(w, r.values(), r.values());
  double best = std::sqrt(rr);
  std::size_t since_improved = 0;

  CgResult result;
  result.residual = std::sqrt(rr);
  while (result.residual > tol) {
    if (result.iterations >= cap) {
      if (result.residual <= options.abs_tol) break;
      std::ostringstream msg;
      msg << "CG did not converge in " << cap << " iterations (residual " << result.residual << ")";
      throw NumericalError(msg.str());
    }
    apply(p, ap);
    const double pap = kernels::weighted_dot(w, p.values(), ap.values());
    if (!(pap > 0.0)) throw NumericalError("CG breakdown: operator not positive definite");
    const double alpha = rr / pap;
    kernels::axpy(alpha, p.values(), x.values());
    kernels::axpy(-alpha, ap.values(), r.values());
    const double rr_new = kernels::weighted_dot(w, r.values(), r.values());
    kernels::axpby(1.0, r.values(), rr_new / rr, p.values());  // p = r + beta p
    rr = rr_new;
    ++result.iterations;
    result.residual = std::sqrt(rr);
    if (!std::isfinite(result.residual)) throw NumericalError("CG produced a non-finite residual");

    // The relative target can sit below the rounding floor of an
    // ill-conditioned operator; accept once the absolute bound holds and
    // progress has stalled.
    if (result.residual < 0.5 * best) {
      best = result.residual;
      since_improved = 0;
    } else if (++since_improved >= 25 && result.residual <= options.abs_tol) {
      break;
    }
  }
  return result;
}

}  // namespace pfr
