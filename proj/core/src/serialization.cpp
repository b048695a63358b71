#include "rigfix/serialization.hpp"

#include <algorithm>

#include "json.hpp"
#include "rigfix/error.hpp"

namespace rigfix {
namespace {

using Json = nlohmann::ordered_json;

Json degrees(const Rotation3& w) {
  return Json::array({rad_to_deg(w.omega_x), rad_to_deg(w.omega_y), rad_to_deg(w.omega_z)});
}

Rotation3 rotation_from_degrees(const Json& j) {
  if (!j.is_array() || j.size() != 3) throw ConfigError("expected a [x, y, z] angle array");
  return Rotation3::from_degrees(j[0].get<double>(), j[1].get<double>(), j[2].get<double>());
}

Json intrinsics_json(const Intrinsics& k) { return Json{{"f", k.f}, {"cx", k.cx}, {"cy", k.cy}}; }

Intrinsics intrinsics_from(const Json& j, Intrinsics fallback) {
  if (j.contains("f")) fallback.f = j.at("f").get<double>();
  if (j.contains("cx")) fallback.cx = j.at("cx").get<double>();
  if (j.contains("cy")) fallback.cy = j.at("cy").get<double>();
  return fallback;
}

Json optional_degrees(const std::optional<double>& v) {
  return v ? Json(rad_to_deg(*v)) : Json(nullptr);
}

Json stats_json(const DisparityStats& s) {
  return Json{{"count", s.count},
              {"fraction_dy_below_1px", s.fraction_dy_below_1px},
              {"median_abs_dy_px", s.median_abs_dy_px},
              {"rms_dy_px", s.rms_dy_px},
              {"dx_at_infinity_px", s.dx_at_infinity_px}};
}

template <typename T>
void read_if(const Json& j, const char* key, T& out) {
  if (j.contains(key) && !j.at(key).is_null()) out = j.at(key).get<T>();
}

GateReason reason_from_string(const std::string& s) {
  for (GateReason r : {GateReason::TooFewMatches, GateReason::LowInlierRate,
                       GateReason::PitchOutOfBounds, GateReason::RollOutOfBounds,
                       GateReason::RelPanOutOfBounds, GateReason::SolverDegenerate}) {
    if (to_string(r) == s) return r;
  }
  throw IoError("unknown gate reason '" + s + "'");
}

}  // namespace

std::string report_to_json(const std::optional<RectificationSolution>& sol,
                           const GateDecision& gate, ModelKind model, std::size_t match_count,
                           const std::string& error) {
  Json j;
  j["model"] = to_string(model);
  if (sol) {
    const double f = sol->focal_px;
    j["d_omega_deg"] = degrees(sol->d_omega);
    j["omega_y1_deg"] = optional_degrees(sol->omega_y1);
    j["omega_z1_deg"] = optional_degrees(sol->omega_z1);
    j["d_f"] = sol->d_f;
    j["omega0_deg"] = degrees(sol->omega0);
    j["omega1_deg"] = degrees(sol->omega1);
    j["match_count"] = sol->match_count;
    j["inlier_count"] = sol->inlier_count;
    j["inlier_rate"] = sol->inlier_rate;
    j["rms_dy_px"] = sol->rms_dy_inliers * f;
    j["iterations"] = sol->iterations;
    j["focal_px"] = f;
  } else {
    for (const char* key : {"d_omega_deg", "omega_y1_deg", "omega_z1_deg", "d_f", "omega0_deg",
                            "omega1_deg"}) {
      j[key] = nullptr;
    }
    j["match_count"] = match_count;
    for (const char* key : {"inlier_count", "inlier_rate", "rms_dy_px", "iterations", "focal_px"}) {
      j[key] = nullptr;
    }
    j["error"] = error;
  }
  Json reasons = Json::array();
  for (GateReason r : gate.reasons) reasons.push_back(to_string(r));
  j["gate"] = Json{{"outcome", to_string(gate.outcome)}, {"reasons", reasons}};
  return j.dump(2) + "\n";
}

SolverReport report_from_json(const std::string& text) {
  try {
    const Json j = Json::parse(text);
    SolverReport r;
    r.model = model_kind_from_string(j.at("model").get<std::string>());
    r.match_count = j.at("match_count").get<std::size_t>();
    const Json& gate = j.at("gate");
    r.gate.outcome = gate.at("outcome").get<std::string>() == "Stereo" ? GateOutcome::Stereo
                                                                       : GateOutcome::MonoFallback;
    for (const auto& reason : gate.at("reasons")) {
      r.gate.reasons.push_back(reason_from_string(reason.get<std::string>()));
    }
    if (!j.at("d_omega_deg").is_null()) {
      RectificationSolution s;
      s.model = r.model;
      s.d_omega = rotation_from_degrees(j.at("d_omega_deg"));
      if (!j.at("omega_y1_deg").is_null()) s.omega_y1 = deg_to_rad(j.at("omega_y1_deg").get<double>());
      if (!j.at("omega_z1_deg").is_null()) s.omega_z1 = deg_to_rad(j.at("omega_z1_deg").get<double>());
      s.d_f = j.at("d_f").get<double>();
      s.omega0 = rotation_from_degrees(j.at("omega0_deg"));
      s.omega1 = rotation_from_degrees(j.at("omega1_deg"));
      s.match_count = r.match_count;
      s.inlier_count = j.at("inlier_count").get<std::size_t>();
      s.inlier_rate = j.at("inlier_rate").get<double>();
      s.focal_px = j.value("focal_px", 1.0);
      s.rms_dy_inliers = j.at("rms_dy_px").get<double>() / s.focal_px;
      s.iterations = j.at("iterations").get<std::size_t>();
      r.solution = s;
    }
    return r;
  } catch (const Json::exception& e) {
    throw IoError(std::string("malformed solver report: ") + e.what());
  } catch (const ConfigError& e) {
    throw IoError(std::string("malformed solver report: ") + e.what());
  }
}

std::string stats_to_json(const DisparityStats& before, const DisparityStats& after) {
  return Json{{"before", stats_json(before)}, {"after", stats_json(after)}}.dump(2) + "\n";
}

namespace {

Json sim_config_json(const SimConfig& cfg) {
  Json j{{"point_count", cfg.point_count},
         {"d_min", cfg.d_min},
         {"d_max", cfg.d_max},
         {"width", cfg.width},
         {"height", cfg.height},
         {"k0", intrinsics_json(cfg.k0)},
         {"k1", intrinsics_json(cfg.k1)},
         {"omega_max_deg", cfg.omega_max_deg},
         {"abs_offset_max_deg", cfg.abs_offset_max_deg},
         {"df_max", cfg.df_max},
         {"noise_sigma_px", cfg.noise_sigma_px},
         {"outlier_rate", cfg.outlier_rate},
         {"outlier_amplitude_px", cfg.outlier_amplitude_px},
         {"seed", cfg.seed}};
  if (cfg.truth) {
    j["truth"] = Json{{"omega0_deg", degrees(cfg.truth->omega0)},
                      {"omega1_deg", degrees(cfg.truth->omega1)},
                      {"d_f", cfg.truth->d_f}};
  }
  return j;
}

}  // namespace

std::string sim_config_to_json(const SimConfig& cfg) { return sim_config_json(cfg).dump(2) + "\n"; }

SimConfig sim_config_from_json(const std::string& text) {
  try {
    const Json j = Json::parse(text);
    if (!j.is_object()) throw ConfigError("simulation config must be a JSON object");
    SimConfig cfg;
    read_if(j, "point_count", cfg.point_count);
    read_if(j, "d_min", cfg.d_min);
    read_if(j, "d_max", cfg.d_max);
    read_if(j, "width", cfg.width);
    read_if(j, "height", cfg.height);
    if (j.contains("k0")) cfg.k0 = intrinsics_from(j.at("k0"), cfg.k0);
    if (j.contains("k1")) cfg.k1 = intrinsics_from(j.at("k1"), cfg.k1);
    read_if(j, "omega_max_deg", cfg.omega_max_deg);
    read_if(j, "abs_offset_max_deg", cfg.abs_offset_max_deg);
    read_if(j, "df_max", cfg.df_max);
    read_if(j, "noise_sigma_px", cfg.noise_sigma_px);
    read_if(j, "outlier_rate", cfg.outlier_rate);
    read_if(j, "outlier_amplitude_px", cfg.outlier_amplitude_px);
    read_if(j, "seed", cfg.seed);
    if (j.contains("truth") && !j.at("truth").is_null()) {
      const Json& t = j.at("truth");
      const double df = t.value("d_f", 0.0);
      if (t.contains("omega0_deg") && t.contains("omega1_deg")) {
        cfg.truth = RigTruth{rotation_from_degrees(t.at("omega0_deg")),
                             rotation_from_degrees(t.at("omega1_deg")), df};
      } else if (t.contains("d_omega_deg")) {
        cfg.truth = RigTruth::from_relative(rotation_from_degrees(t.at("d_omega_deg")), df,
                                            deg_to_rad(t.value("pan_offset_deg", 0.0)),
                                            deg_to_rad(t.value("roll_offset_deg", 0.0)));
      } else {
        throw ConfigError("truth needs omega0_deg/omega1_deg or d_omega_deg");
      }
    }
    cfg.validate();
    return cfg;
  } catch (const Json::exception& e) {
    throw ConfigError(std::string("malformed simulation config: ") + e.what());
  }
}

std::string scene_to_json(const SimConfig& cfg, const SceneTruth& scene,
                          const RenderedMatches* rendered) {
  Json points = Json::array();
  for (const ScenePoint& p : scene.points) points.push_back(Json::array({p.X, p.Y, p.Z, p.W}));
  Json truth{{"omega0_deg", degrees(scene.true_omega0)},
             {"omega1_deg", degrees(scene.true_omega1)},
             {"d_omega_deg", degrees(scene.true_omega1 - scene.true_omega0)},
             {"d_f", scene.true_df},
             {"k0", intrinsics_json(scene.k0)},
             {"k1", intrinsics_json(scene.k1)},
             {"width", scene.width},
             {"height", scene.height},
             {"noise_sigma_px", scene.noise_sigma_px},
             {"outlier_rate", scene.outlier_rate},
             {"outlier_amplitude_px", scene.outlier_amplitude_px},
             {"seed", scene.seed},
             {"points", points}};
  Json j{{"config", sim_config_json(cfg)}, {"truth", truth}};
  if (rendered) {
    j["rendered"] = Json{
        {"match_count", rendered->matches.size()},
        {"outlier_count", std::count(rendered->outlier.begin(), rendered->outlier.end(), true)},
        {"skipped", rendered->skipped}};
  }
  return j.dump(2) + "\n";
}

SceneTruth scene_truth_from_json(const std::string& text) {
  try {
    const Json j = Json::parse(text);
    const Json& t = j.at("truth");
    SceneTruth s;
    s.true_omega0 = rotation_from_degrees(t.at("omega0_deg"));
    s.true_omega1 = rotation_from_degrees(t.at("omega1_deg"));
    s.true_df = t.at("d_f").get<double>();
    s.k0 = intrinsics_from(t.at("k0"), {});
    s.k1 = intrinsics_from(t.at("k1"), {});
    read_if(t, "width", s.width);
    read_if(t, "height", s.height);
    read_if(t, "noise_sigma_px", s.noise_sigma_px);
    read_if(t, "outlier_rate", s.outlier_rate);
    read_if(t, "outlier_amplitude_px", s.outlier_amplitude_px);
    read_if(t, "seed", s.seed);
    if (t.contains("points")) {
      for (const auto& p : t.at("points")) {
        s.points.push_back({p.at(0).get<double>(), p.at(1).get<double>(), p.at(2).get<double>(),
                            p.at(3).get<double>()});
      }
    }
    return s;
  } catch (const Json::exception& e) {
    throw IoError(std::string("malformed scene file: ") + e.what());
  }
}

}  // namespace rigfix
