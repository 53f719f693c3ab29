#pragma once
// Conditional stability diagnostics: Hoelder-in-time fits of trajectory
// differences, the logarithmic initial-data constants and the Lipschitz
// constant chain on finite-dimensional subspaces.
//
// Constants that are suprema over the admissible set (M, M1, L, L1, C0,
// Cbar) are measured over a fixed seeded probe ensemble and are therefore
// lower bounds of the true values.

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "pfr/forward.hpp"
#include "pfr/linearised.hpp"

namespace pfr {

struct LambdaWeights {
  double lambda1 = 0.0;  ///< (1 - e^{-gamma t}) / (1 - e^{-gamma T})
  double lambda2 = 0.0;  ///< (e^{gamma t} - 1) / (e^{gamma T} - 1)
  double tangent = 0.0;  ///< beta t
};

/// beta = gamma / (e^{gamma T} - 1); tends to 1/T as gamma -> 0.
double beta_of(double gamma, double T);

/// Throws InputError unless 0 <= t <= T, T > 0 and gamma > 0.
LambdaWeights lambda_weights(double t, double T, double gamma);

enum class HolderTemplate { lambda1, lambda2 };
std::string to_string(HolderTemplate t);

/// Distance curve d(t) = ||psi(t)|| at increasing times ending at T.
struct DistanceCurve {
  std::vector<double> times;
  std::vector<double> d;
};

struct TemplateFit {
  double gamma = 0.0;
  double C1 = 0.0;
  /// RMS over interior times of lambda_emp(t) - lambda_template(t).
  double residual = 0.0;
};

struct HolderFit {
  double M = 0.0;
  TemplateFit lambda1;
  TemplateFit lambda2;
  /// The template with the smaller residual.
  HolderTemplate chosen = HolderTemplate::lambda1;
  double gamma = 0.0;
  double C1 = 0.0;
  /// Snapshots with d(t) > C1 M^{1-lambda} d(T)^lambda, over all curves.
  std::size_t violations = 0;
  /// lambda_emp(t) = log(d(t) / (C1 M)) / log(d(T) / M) for the first curve.
  std::vector<double> lambda_emp;
};

/// Smallest C1 over gamma for one template, with
/// C1(gamma) = max over curves and times of d(t) / (M^{1-lambda(t)} d(T)^{lambda(t)}).
TemplateFit fit_template(const std::vector<DistanceCurve>& curves, double M, HolderTemplate which);

/// Joint fit over several curves (one gamma, one C1). Throws InputError when
/// some d(T) == 0 (distinct data cannot reach identical terminal states) or
/// when M < max d.
HolderFit holder_fit(const std::vector<DistanceCurve>& curves, double M);

DistanceCurve distance_curve(const Trajectory& a, const Trajectory& b);

/// Pair version; M defaults to the largest norm of either trajectory (and at
/// least max d).
HolderFit holder_fit(const Trajectory& a, const Trajectory& b, double M = 0.0);

/// Number of snapshots violating the estimate for given (gamma, C1).
std::size_t holder_violations(const std::vector<DistanceCurve>& curves, double M, double gamma,
                              double C1, HolderTemplate which);

struct LogConvexityReport {
  std::vector<double> log_q;          ///< l(t) = log ||psi(t)||^2
  std::vector<double> second_diff;    ///< centred second differences of l
  double min_second_diff = 0.0;
  /// Smallest c >= 0 with l'' + c |l'| + c >= 0 at every interior time.
  double c_min = 0.0;
};

/// Needs uniformly spaced times, at least three of them, and q > 0.
LogConvexityReport log_convexity_diagnostic(const std::vector<double>& times,
                                            const std::vector<double>& q);
LogConvexityReport log_convexity_diagnostic(const DistanceCurve& curve);

struct LogConstants {
  double beta = 0.0;
  double C2 = 0.0;
  double eps_threshold = 0.0;
};

/// beta = gamma/(e^{gamma T}-1),
/// C2 = 2 M1 M sqrt(C1)/sqrt(beta) + 3 M1^2/(4 beta C1),
/// eps_threshold = exp(-1 / min{1, 4 sqrt(3) M C1^{3/2} / (9 M1)}).
LogConstants compute_log_constants(double M, double M1, double C1, double gamma, double T);

struct XBracket {
  double x_lower = 0.0;  ///< r
  double x_bar = 0.0;    ///< smallest root of x sqrt(1-x) = r
  double x_upper = 0.0;  ///< sqrt(3) r
};

/// Throws InputError when r <= 0 or r exceeds the maximum 2 sqrt(3)/9.
XBracket solve_x_bracket(double r);

struct LipschitzChain {
  double m0 = 0.0;
  double log_m0 = 0.0;
  /// log C_s; +inf when the double exponential leaves double range.
  double log_Cs = 0.0;
  /// log log C_s, finite whenever C_s > 1.
  double log_log_Cs = 0.0;
  /// C_s itself when representable.
  double Cs = 0.0;
  bool saturated = false;
};

/// m0 = (L / C_Lambda) e^{-Q2^2},
/// C_s = max{ (2 Cbar / M) e^{16 C0^2 C2 / m0}, 2 / m0 }, evaluated in log
/// scale. m_bound is accepted for interface completeness and not used by
/// the formulas.
LipschitzChain compute_lipschitz_chain(double C0, double Q2, double L, double C_Lambda, double M,
                                       double C2, double Cbar, double m_bound = 0.0);

/// H^1(0,T; L2) norm of states sampled every dt:
/// sqrt(sum dt ||u_n||^2 + sum dt ||(u_{n+1}-u_n)/dt||^2).
double h1_time_norm(const std::vector<StateTriple>& states, double dt);

struct LinearisedStability {
  double L = 0.0;
  double L1 = 0.0;
  double Q1 = 0.0;
  double gamma = 0.0;
  double beta = 0.0;
  double Q2 = 0.0;
  HolderTemplate chosen = HolderTemplate::lambda1;
};

/// Probes are normalised to unit L2 norm (zero probes dropped); throws
/// InputError when none remain.
LinearisedStability linearised_stability_report(const LinearisedOperator& op,
                                                const std::vector<StateTriple>& probes,
                                                std::size_t jobs = 1);

struct StabilityConfig {
  std::size_t ensemble_size = 32;
  std::uint64_t seed = 2024;
  std::size_t subspace_modes = 3;
  std::size_t probe_basis = 8;
  std::size_t probe_random = 8;
  /// Pairs of ensemble members used for the derivative Lipschitz constant.
  std::size_t lipschitz_pairs = 4;
  std::size_t jobs = 1;
};

struct StabilityReport {
  // Ensemble
  std::size_t ensemble_size = 0;
  std::uint64_t seed = 0;
  double T = 0.0;
  double M_bound = 0.0;
  double M1_bound = 0.0;
  double Cbar = 0.0;
  // Hoelder fit over ensemble pairs
  HolderFit holder;
  double gamma_fit = 0.0;
  double C1_fit = 0.0;
  double log_convexity_c = 0.0;
  // Logarithmic stability
  LogConstants log_constants;
  // Linearised
  LinearisedStability linearised;
  // Lipschitz chain
  double C0 = 0.0;
  double C_Lambda = 0.0;
  std::size_t subspace_dim = 0;
  LipschitzChain chain;
  // Curves of the first ensemble pair
  DistanceCurve curve;
  std::vector<double> curve_lambda_emp;
  std::vector<double> curve_log_q;
};

StabilityReport compute_stability_report(const ModelParams& p, const GridPtr& grid,
                                         const TimeGrid& tg, const StabilityConfig& cfg);

nlohmann::json to_json(const StabilityReport& r);

/// CSV with columns t, d, lambda_emp, log_q.
std::string stability_curves_csv(const StabilityReport& r);

}  // namespace pfr
