#pragma once

#include <fstream>
#include <string>

#include "json.hpp"
#include "levyfpt/model.hpp"

namespace levyfpt {

/// Builds a model from the flat JSON document
///   {"family": "bm|nig|nts|cgmy", "params": {...}, "standard": bool}
/// Parameter keys are the lowercase names "alpha", "theta", "beta", "gamma",
/// "mu", "c", "lambda_plus", "lambda_minus", "sigma". With "standard": true
/// the derived parameters (gamma or c, and mu = 0) are computed from the
/// standardization constraints and must be omitted.
inline LevyModel model_from_json(const nlohmann::json& j) {
  auto need = [&](const nlohmann::json& p, const char* key) -> double {
    if (!p.contains(key))
      throw ParseError(std::string("model config: missing key '") + key + "'");
    return p.at(key).get<double>();
  };
  auto opt = [&](const nlohmann::json& p, const char* key, double dflt) {
    return p.contains(key) ? p.at(key).get<double>() : dflt;
  };
  if (!j.contains("family"))
    throw ParseError("model config: missing key 'family'");
  std::string fam = j.at("family").get<std::string>();
  bool standard = j.value("standard", false);
  nlohmann::json p = j.value("params", nlohmann::json::object());

  if (fam == "bm") {
    return LevyModel::brownian(opt(p, "mu", 0.0), need(p, "sigma"));
  }
  if (fam == "nig") {
    if (standard) return standardize_nig(need(p, "theta"), need(p, "beta"));
    return LevyModel::nig(need(p, "theta"), need(p, "beta"), need(p, "gamma"),
                          opt(p, "mu", 0.0));
  }
  if (fam == "nts") {
    if (standard)
      return standardize_nts(need(p, "alpha"), need(p, "theta"),
                             need(p, "beta"));
    return LevyModel::nts(need(p, "alpha"), need(p, "theta"), need(p, "beta"),
                          need(p, "gamma"), opt(p, "mu", 0.0));
  }
  if (fam == "cgmy") {
    if (standard)
      return standardize_cgmy(need(p, "alpha"), need(p, "lambda_plus"),
                              need(p, "lambda_minus"));
    return LevyModel::cgmy(need(p, "alpha"), need(p, "c"),
                           need(p, "lambda_plus"), need(p, "lambda_minus"),
                           opt(p, "mu", 0.0));
  }
  throw ParseError("model config: unknown family '" + fam + "'");
}

inline nlohmann::json model_to_json(const LevyModel& model) {
  nlohmann::json p;
  switch (model.family()) {
    case Family::bm: {
      const auto& m = model.as_bm();
      p = {{"mu", m.mu}, {"sigma", m.sigma}};
      break;
    }
    case Family::nig: {
      const auto& m = model.as_nig();
      p = {{"theta", m.theta}, {"beta", m.beta}, {"gamma", m.gamma},
           {"mu", m.mu}};
      break;
    }
    case Family::nts: {
      const auto& m = model.as_nts();
      p = {{"alpha", m.alpha}, {"theta", m.theta}, {"beta", m.beta},
           {"gamma", m.gamma}, {"mu", m.mu}};
      break;
    }
    case Family::cgmy: {
      const auto& m = model.as_cgmy();
      p = {{"alpha", m.alpha},
           {"c", m.c},
           {"lambda_plus", m.lambda_plus},
           {"lambda_minus", m.lambda_minus},
           {"mu", m.mu}};
      break;
    }
  }
  return {{"family", family_name(model.family())}, {"params", p}};
}

inline LevyModel load_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open model config: " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError("model config " + path + ": " + e.what());
  }
  return model_from_json(j);
}

}  // namespace levyfpt
