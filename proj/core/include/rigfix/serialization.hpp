#pragma once

#include <optional>
#include <string>

#include "rigfix/gating.hpp"
#include "rigfix/rectifier.hpp"
#include "rigfix/simulator.hpp"
#include "rigfix/solver.hpp"

namespace rigfix {

/// Solver report: model, d_omega_deg, omega_y1_deg, omega_z1_deg, d_f,
/// omega0_deg, omega1_deg, match_count, inlier_count, inlier_rate,
/// rms_dy_px, iterations, focal_px and gate {outcome, reasons}. Angles are
/// degrees. Without a solution the numeric fields are null and `error`
/// carries the solver message.
std::string report_to_json(const std::optional<RectificationSolution>& sol,
                           const GateDecision& gate, ModelKind model, std::size_t match_count,
                           const std::string& error = {});

struct SolverReport {
  std::optional<RectificationSolution> solution;
  GateDecision gate;
  ModelKind model = ModelKind::FourParam;
  std::size_t match_count = 0;
};

/// Parses report_to_json output. Throws IoError on malformed input.
SolverReport report_from_json(const std::string& text);

std::string stats_to_json(const DisparityStats& before, const DisparityStats& after);

std::string sim_config_to_json(const SimConfig& cfg);
/// Reads the known SimConfig keys from a JSON object, leaving defaults for
/// absent ones. `truth` may give omega0_deg/omega1_deg or d_omega_deg (with
/// optional pan_offset_deg/roll_offset_deg), plus d_f. Throws ConfigError.
SimConfig sim_config_from_json(const std::string& text);

std::string scene_to_json(const SimConfig& cfg, const SceneTruth& scene,
                          const RenderedMatches* rendered = nullptr);
/// Truth block of a scene file written by scene_to_json.
SceneTruth scene_truth_from_json(const std::string& text);

}  // namespace rigfix
