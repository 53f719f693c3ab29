#include "pfr/model.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "pfr/error.hpp"

namespace pfr {
namespace {

void require_finite(double s, const char* what) {
  if (!std::isfinite(s)) throw InputError(std::string(what) + ": non-finite argument");
}

struct Key {
  const char* name;
  double ModelParams::*member;
};

constexpr Key kKeys[] = {
    {"lambda", &ModelParams::lambda_phi}, {"eta", &ModelParams::eta},
    {"D", &ModelParams::D_p},             {"gamma_h", &ModelParams::gamma_h},
    {"gamma_c", &ModelParams::gamma_c},   {"S_h", &ModelParams::S_h},
    {"S_c", &ModelParams::S_c},           {"gamma_p", &ModelParams::gamma_p},
    {"alpha_h", &ModelParams::alpha_h},   {"alpha_c", &ModelParams::alpha_c},
    {"M", &ModelParams::M_pot},           {"m_ref", &ModelParams::m_ref},
    {"rho", &ModelParams::rho},           {"A", &ModelParams::A_apop},
    {"sigma_l", &ModelParams::sigma_l},   {"sigma_r", &ModelParams::sigma_r},
};

}  // namespace

std::vector<std::string> ModelParams::validate() const {
  for (const auto& k : kKeys) {
    if (!std::isfinite(this->*k.member)) {
      throw InputError(std::string("model parameter '") + k.name + "' is not finite");
    }
  }
  const Key nonneg[] = {{"lambda", &ModelParams::lambda_phi}, {"eta", &ModelParams::eta},
                        {"D", &ModelParams::D_p},             {"gamma_h", &ModelParams::gamma_h},
                        {"gamma_p", &ModelParams::gamma_p},   {"M", &ModelParams::M_pot}};
  for (const auto& k : nonneg) {
    if (this->*k.member < 0.0) {
      throw InputError(std::string("model parameter '") + k.name + "' must be >= 0");
    }
  }
  if (m_ref <= 0.0) throw InputError("model parameter 'm_ref' must be > 0");
  if (sigma_r <= 0.0) throw InputError("model parameter 'sigma_r' must be > 0");

  std::vector<std::string> warnings;
  for (const auto& k : kKeys) {
    const std::string name = k.name;
    if (name == "A" || name == "sigma_l") continue;
    if (!(this->*k.member > 0.0)) warnings.push_back("'" + name + "' is not strictly positive");
  }
  if (!(A_apop > 0.0)) warnings.push_back("'A' <= 0 violates the A > 0 assumption on m");
  if (!(sigma_l > 0.0)) warnings.push_back("'sigma_l' is not strictly positive");
  if (gamma_h + std::min(0.0, gamma_ch()) < 0.0) {
    warnings.push_back("gamma_c < 0: nutrient decay can become negative in tumour");
  }
  return warnings;
}

nlohmann::json to_json(const ModelParams& p) {
  nlohmann::json j = nlohmann::json::object();
  for (const auto& k : kKeys) j[k.name] = p.*k.member;
  return j;
}

ModelParams params_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw InputError("params: expected a JSON object");
  ModelParams p;
  for (const auto& k : kKeys) {
    const auto it = j.find(k.name);
    if (it == j.end()) throw InputError(std::string("params: missing required key '") + k.name + "'");
    if (!it->is_number()) throw InputError(std::string("params: key '") + k.name + "' must be a number");
    p.*k.member = it->get<double>();
  }
  for (const auto& [key, value] : j.items()) {
    bool known = false;
    for (const auto& k : kKeys) known = known || key == k.name;
    if (!known) throw InputError("params: unknown key '" + key + "'");
  }
  return p;
}

namespace model {

double eval_F(double s, const ModelParams& p) {
  require_finite(s, "F");
  return raw::F(s, p.M_pot);
}
double eval_F1(double s, const ModelParams& p) {
  require_finite(s, "F'");
  return raw::F1(s, p.M_pot);
}
double eval_F2(double s, const ModelParams& p) {
  require_finite(s, "F''");
  return raw::F2(s, p.M_pot);
}

double eval_h(double s, const ModelParams& p) {
  require_finite(s, "h");
  return raw::h(s, p.M_pot);
}
double eval_h1(double s, const ModelParams& p) {
  require_finite(s, "h'");
  return raw::h1(s, p.M_pot);
}
double eval_h2(double s, const ModelParams& p) {
  require_finite(s, "h''");
  return raw::h2(s, p.M_pot);
}

double eval_m(double s, const ModelParams& p) {
  require_finite(s, "m");
  const double u = (s - p.sigma_l) / p.sigma_r;
  return p.m_ref * (0.5 * (p.rho + p.A_apop) + (p.rho - p.A_apop) / std::numbers::pi * std::atan(u));
}

double eval_m1(double s, const ModelParams& p) {
  require_finite(s, "m'");
  const double u = (s - p.sigma_l) / p.sigma_r;
  return p.m_ref * (p.rho - p.A_apop) / std::numbers::pi / (p.sigma_r * (1.0 + u * u));
}

double eval_m2(double s, const ModelParams& p) {
  require_finite(s, "m''");
  const double u = (s - p.sigma_l) / p.sigma_r;
  const double q = 1.0 + u * u;
  return -2.0 * p.m_ref * (p.rho - p.A_apop) / std::numbers::pi * u /
         (p.sigma_r * p.sigma_r * q * q);
}

double eval_G(double phi, double sigma, const ModelParams& p) {
  return eval_F(phi, p) - eval_m(sigma, p) * eval_h(phi, p);
}

double eval_G_phi(double phi, double sigma, const ModelParams& p) {
  return eval_F1(phi, p) - eval_m(sigma, p) * eval_h1(phi, p);
}

bool check_double_well(double sigma, const ModelParams& p) {
  return std::abs(eval_m(sigma, p) / p.M_pot) < 1.0 / 3.0;
}

}  // namespace model
}  // namespace pfr
