#pragma once
// Derivative of the discrete solution operator and its exact discrete adjoint.
//
// The linearised step differentiates the IMEX step itself, with coefficients
// frozen at the base state of the same step:
//   Y+ = A_phi^-1 Pi [Y - dt (g_phi Y + g_sigma Z)]
//   Z+ = A_sigma^-1 [Z + dt (S_ch Y - gamma_ch (sigma Y + phi Z))]
//   P+ = A_p^-1 [P + dt alpha_ch Y]
// with g_phi = F'' - m h'' and g_sigma = -m' h'. Pi zeroes the phi boundary
// nodes. Per node the old-state coupling is a 3x3 matrix B, so one step is
// A^-1 Pi B and its adjoint in the L2 quadrature inner product is B^T Pi A^-1.

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "pfr/forward.hpp"

namespace pfr {

struct LinearisedOptions {
  CgOptions cg;
  /// Test hook: negates the adjoint output to exercise the failure path.
  bool flip_adjoint_sign = false;
};

class LinearisedOperator {
 public:
  /// Runs the base trajectory from s0 and stores every step.
  LinearisedOperator(const ModelParams& params, const TimeGrid& tg, const StateTriple& s0,
                     LinearisedOptions options = {});

  /// D R(s0)[v].
  StateTriple apply(const StateTriple& v) const;
  /// Every step of the linearised solution, index 0 = v.
  std::vector<StateTriple> apply_trajectory(const StateTriple& v) const;
  /// D R(s0)^*[g] in the L2 quadrature inner product.
  StateTriple apply_adjoint(const StateTriple& g) const;

  /// R(s0).
  const StateTriple& base_terminal() const { return base_.states.back(); }
  const Trajectory& base() const { return base_; }
  const ModelParams& params() const { return solver_.params(); }
  const TimeGrid& time_grid() const { return solver_.time_grid(); }
  const GridPtr& grid() const { return solver_.grid(); }

 private:
  void coupled_rhs(const StateTriple& base, const StateTriple& v, StateTriple& out) const;
  void coupled_rhs_transpose(const StateTriple& base, const StateTriple& v, StateTriple& out) const;
  void implicit_solve(const StateTriple& rhs, StateTriple& x) const;

  ForwardSolver solver_;
  Trajectory base_;
  LinearisedOptions options_;
};

StateTriple apply_DR(const LinearisedOperator& op, const StateTriple& v);
StateTriple apply_DR_adjoint(const LinearisedOperator& op, const StateTriple& g);

/// Restricts the input of an operator to span(basis): both the start vector
/// and every iterate are projected.
struct NormEstimate {
  double norm = 0.0;
  std::size_t iterations = 0;
  bool converged = false;
  /// Input direction attaining the estimate (unit L2 norm).
  StateTriple direction;
};

struct PowerOptions {
  double rel_tol = 1e-4;
  std::size_t max_iter = 200;
  std::uint64_t seed = 1;
  /// Optional start vector; random smooth field otherwise.
  const StateTriple* start = nullptr;
  /// Optional restriction of the input space.
  const SubspaceBasis* basis = nullptr;
};

/// Power iteration on D R^* D R. Warns when the cap is reached.
NormEstimate estimate_operator_norm(const LinearisedOperator& op, const PowerOptions& opts = {});

/// Smooth random triple: a few random low Fourier modes per field plus a
/// little node noise, phi boundary zero. Deterministic in the seed.
StateTriple random_smooth_triple(const GridPtr& grid, std::uint64_t seed, double node_noise = 0.0);

/// Probe set: the first n_basis coarse-basis elements plus n_random smooth
/// random triples, each scaled to unit L2 norm.
std::vector<StateTriple> derivative_probes(const GridPtr& grid, std::size_t n_basis,
                                           std::size_t n_random, std::uint64_t seed);

struct TaylorResult {
  std::vector<double> eps;
  std::vector<double> remainder;  ///< ||R(s0+eh) - R(s0) - e DR[h]||
  std::vector<double> slopes;     ///< between consecutive eps
  double slope = 0.0;             ///< least-squares slope of log r vs log eps
  bool pass(double lo = 1.9, double hi = 2.1) const { return slope >= lo && slope <= hi; }
};

/// Remainder sweep for one direction; op must be built at s0.
TaylorResult taylor_test(const LinearisedOperator& op, const StateTriple& h,
                         const std::vector<double>& eps = {1e-1, 1e-2, 1e-3, 1e-4});

struct AdjointResult {
  /// max over pairs of |<DR u, g> - <u, DR^* g>| / (||u|| ||g||)
  double max_mismatch = 0.0;
  std::size_t pairs = 0;
};

AdjointResult adjoint_test(const LinearisedOperator& op, std::size_t pairs, std::uint64_t seed);

struct LipschitzDerivativeReport {
  double sup_difference = 0.0;  ///< sup_h ||(DR(a) - DR(b)) h|| / ||h||
  double distance = 0.0;        ///< ||a - b||
  double ratio = 0.0;           ///< sup_difference / distance, 0 when a == b
};

LipschitzDerivativeReport lipschitz_derivative_check(const StateTriple& a, const StateTriple& b,
                                                     const ModelParams& p, const TimeGrid& tg,
                                                     const std::vector<StateTriple>& probes);

/// {taylor_slopes, adjoint_mismatch, operator_norm}
nlohmann::json derivative_report_json(const std::vector<double>& taylor_slopes,
                                      double adjoint_mismatch, double operator_norm);

}  // namespace pfr
