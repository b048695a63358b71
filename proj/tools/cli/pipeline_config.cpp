#include "pipeline_config.hpp"

#include <fstream>
#include <iterator>
#include <set>
#include <sstream>

#include "json.hpp"
#include "rigfix/error.hpp"

namespace rigfix::cli {
namespace {

using Json = nlohmann::json;

void reject_unknown(const Json& j, const std::set<std::string>& known, const std::string& where) {
  for (const auto& item : j.items()) {
    if (!known.count(item.key())) {
      throw ConfigError("unknown key '" + item.key() + "' in " + where);
    }
  }
}

template <typename T>
void read_if(const Json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

Intrinsics intrinsics_from(const Json& j) {
  reject_unknown(j, {"f", "cx", "cy"}, "intrinsics");
  Intrinsics k{j.at("f").get<double>(), j.at("cx").get<double>(), j.at("cy").get<double>()};
  k.validate();
  return k;
}

}  // namespace

void PipelineConfig::validate() const {
  if (k0) k0->validate();
  if (k1) k1->validate();
  harris.validate();
  matcher.validate();
  solver.validate();
  gate.validate();
}

PipelineConfig load_pipeline_config(const std::filesystem::path& path) {
  const std::string text = read_text_file(path);
  PipelineConfig cfg;
  try {
    const Json j = Json::parse(text);
    if (!j.is_object()) throw ConfigError("pipeline config must be a JSON object");
    reject_unknown(j, {"k0", "k1", "harris", "matcher", "solver", "gate"}, "pipeline config");
    if (j.contains("k0")) cfg.k0 = intrinsics_from(j.at("k0"));
    if (j.contains("k1")) cfg.k1 = intrinsics_from(j.at("k1"));
    if (j.contains("harris")) {
      const Json& h = j.at("harris");
      reject_unknown(h, {"k", "nms_radius", "max_corners", "relative_threshold", "border"}, "harris");
      read_if(h, "k", cfg.harris.k);
      read_if(h, "nms_radius", cfg.harris.nms_radius);
      read_if(h, "max_corners", cfg.harris.max_corners);
      read_if(h, "relative_threshold", cfg.harris.relative_threshold);
      read_if(h, "border", cfg.harris.border);
    }
    if (j.contains("matcher")) {
      const Json& m = j.at("matcher");
      reject_unknown(m, {"levels", "patch_radius", "vertical_slack", "refine_radius", "coarse_range",
                         "lr_tol"},
                     "matcher");
      read_if(m, "levels", cfg.matcher.levels);
      read_if(m, "patch_radius", cfg.matcher.patch_radius);
      read_if(m, "vertical_slack", cfg.matcher.vertical_slack);
      read_if(m, "refine_radius", cfg.matcher.refine_radius);
      read_if(m, "coarse_range", cfg.matcher.coarse_range);
      read_if(m, "lr_tol", cfg.matcher.lr_tol);
    }
    if (j.contains("solver")) {
      const Json& s = j.at("solver");
      reject_unknown(s, {"thresholds_px", "min_matches_factor", "max_iterations", "model",
                         "min_dx_spread_px"},
                     "solver");
      read_if(s, "thresholds_px", cfg.solver.thresholds_px);
      read_if(s, "min_matches_factor", cfg.solver.min_matches_factor);
      read_if(s, "max_iterations", cfg.solver.max_iterations);
      read_if(s, "min_dx_spread_px", cfg.solver.min_dx_spread_px);
      if (s.contains("model")) cfg.solver.model = model_kind_from_string(s.at("model").get<std::string>());
    }
    if (j.contains("gate")) {
      const Json& g = j.at("gate");
      reject_unknown(g, {"min_matches", "min_inlier_rate", "inlier_dy_px", "max_abs_pitch_roll_deg",
                         "max_rel_pan_deg"},
                     "gate");
      read_if(g, "min_matches", cfg.gate.min_matches);
      read_if(g, "min_inlier_rate", cfg.gate.min_inlier_rate);
      read_if(g, "inlier_dy_px", cfg.gate.inlier_dy_px);
      read_if(g, "max_abs_pitch_roll_deg", cfg.gate.max_abs_pitch_roll_deg);
      read_if(g, "max_rel_pan_deg", cfg.gate.max_rel_pan_deg);
    }
  } catch (const Json::exception& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
  cfg.validate();
  return cfg;
}

Intrinsics parse_intrinsics(const std::string& text) {
  std::istringstream in(text);
  Intrinsics k;
  char c1 = 0;
  char c2 = 0;
  if (!(in >> k.f >> c1 >> k.cx >> c2 >> k.cy) || c1 != ',' || c2 != ',' || !(in >> std::ws).eof()) {
    throw ConfigError("intrinsics must be given as f,cx,cy (got '" + text + "')");
  }
  k.validate();
  return k;
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), {}};
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << text;
  if (!out) throw IoError("write failed for " + path.string());
}

}  // namespace rigfix::cli
