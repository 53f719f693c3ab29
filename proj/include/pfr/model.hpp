#pragma once
// Nonlinearities of the prostate-cancer phase-field model and its
// coefficient set.
//
//   d_t phi   - lambda Lap phi + F'(phi) - m(sigma) h'(phi) = 0
//   d_t sigma - eta Lap sigma = S_h + S_ch phi - gamma_h sigma - gamma_ch sigma phi
//   d_t p     - D Lap p + gamma_p p = alpha_h + alpha_ch phi
//
// with phi = 0 and zero-flux sigma, p on the boundary.

#include <string>
#include <vector>

#include "json.hpp"

namespace pfr {

struct ModelParams {
  double lambda_phi = 0.01;  ///< phase diffusivity
  double eta = 0.1;          ///< nutrient diffusivity
  double D_p = 0.1;          ///< PSA diffusivity
  double gamma_h = 1.0;      ///< nutrient uptake, healthy
  double gamma_c = 2.0;      ///< nutrient uptake, tumour
  double S_h = 1.0;          ///< nutrient supply, healthy
  double S_c = 1.5;          ///< nutrient supply, tumour
  double gamma_p = 1.0;      ///< PSA decay
  double alpha_h = 0.5;      ///< PSA production, healthy
  double alpha_c = 2.0;      ///< PSA production, tumour
  double M_pot = 1.0;        ///< scale of F and h
  double m_ref = 0.3;
  double rho = 1.0;
  double A_apop = 0.2;
  double sigma_l = 0.8;
  double sigma_r = 0.2;

  double gamma_ch() const { return gamma_c - gamma_h; }
  double S_ch() const { return S_c - S_h; }
  double alpha_ch() const { return alpha_c - alpha_h; }

  /// Throws InputError on values the discrete model cannot use (non-finite,
  /// negative diffusivities or rates, m_ref <= 0, sigma_r <= 0). Returns
  /// warnings for violations of the strict positivity assumptions that the
  /// formulas tolerate (zero rates, A_apop <= 0, M_pot == 0).
  std::vector<std::string> validate() const;

  bool operator==(const ModelParams&) const = default;
};

/// Flat JSON object keyed by the model's symbol names ("lambda", "eta", "D",
/// "gamma_h", ..., "M", "m_ref", "rho", "A", "sigma_l", "sigma_r"). Parsing
/// rejects missing and unknown keys.
nlohmann::json to_json(const ModelParams& p);
ModelParams params_from_json(const nlohmann::json& j);

namespace model {

// Unchecked scalar forms for inner loops.
namespace raw {
inline double F(double s, double M) { return M * s * s * (1.0 - s) * (1.0 - s); }
inline double F1(double s, double M) { return 2.0 * M * s * (1.0 - s) * (1.0 - 2.0 * s); }
inline double F2(double s, double M) { return 2.0 * M * (1.0 - 6.0 * s + 6.0 * s * s); }
inline double h(double s, double M) { return M * s * s * (3.0 - 2.0 * s); }
inline double h1(double s, double M) { return 6.0 * M * s * (1.0 - s); }
inline double h2(double s, double M) { return 6.0 * M * (1.0 - 2.0 * s); }
}  // namespace raw

double eval_F(double s, const ModelParams& p);
double eval_F1(double s, const ModelParams& p);
double eval_F2(double s, const ModelParams& p);

double eval_h(double s, const ModelParams& p);
double eval_h1(double s, const ModelParams& p);
double eval_h2(double s, const ModelParams& p);

/// Tilting function m(s) = m_ref((rho+A)/2 + (rho-A)/pi atan((s-sigma_l)/sigma_r)).
double eval_m(double s, const ModelParams& p);
double eval_m1(double s, const ModelParams& p);
double eval_m2(double s, const ModelParams& p);

/// Tilted potential G(phi, sigma) = F(phi) - m(sigma) h(phi).
double eval_G(double phi, double sigma, const ModelParams& p);
/// dG/dphi: the reaction term of the phase equation.
double eval_G_phi(double phi, double sigma, const ModelParams& p);

/// |m(sigma)/M_pot| < 1/3, under which G(., sigma) keeps its minima at 0 and 1.
bool check_double_well(double sigma, const ModelParams& p);

}  // namespace model
}  // namespace pfr
