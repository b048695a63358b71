#include "rigfix/gating.hpp"

#include <algorithm>
#include <cmath>

#include "rigfix/error.hpp"

namespace rigfix {

void GateConfig::validate() const {
  if (min_matches <= 0 || !(min_inlier_rate > 0.0 && min_inlier_rate <= 1.0) ||
      !(inlier_dy_px > 0.0) || !(max_abs_pitch_roll_deg > 0.0) || !(max_rel_pan_deg > 0.0)) {
    throw ConfigError("invalid gate configuration");
  }
}

std::string_view to_string(GateOutcome outcome) {
  return outcome == GateOutcome::Stereo ? "Stereo" : "MonoFallback";
}

std::string_view to_string(GateReason reason) {
  switch (reason) {
    case GateReason::TooFewMatches: return "TooFewMatches";
    case GateReason::LowInlierRate: return "LowInlierRate";
    case GateReason::PitchOutOfBounds: return "PitchOutOfBounds";
    case GateReason::RollOutOfBounds: return "RollOutOfBounds";
    case GateReason::RelPanOutOfBounds: return "RelPanOutOfBounds";
    case GateReason::SolverDegenerate: return "SolverDegenerate";
  }
  return "Unknown";
}

bool GateDecision::has(GateReason r) const {
  return std::find(reasons.begin(), reasons.end(), r) != reasons.end();
}

GateDecision evaluate(const RectificationSolution& sol, const GateConfig& cfg) {
  cfg.validate();
  GateDecision d;
  if (sol.match_count < static_cast<std::size_t>(cfg.min_matches)) {
    d.reasons.push_back(GateReason::TooFewMatches);
  }

  double rate = sol.inlier_rate;
  if (!sol.abs_residuals_px.empty()) {
    const auto inliers = std::count_if(sol.abs_residuals_px.begin(), sol.abs_residuals_px.end(),
                                       [&](double r) { return r <= cfg.inlier_dy_px; });
    rate = static_cast<double>(inliers) / static_cast<double>(sol.abs_residuals_px.size());
  }
  if (!(rate >= cfg.min_inlier_rate)) d.reasons.push_back(GateReason::LowInlierRate);

  const double bound = deg_to_rad(cfg.max_abs_pitch_roll_deg);
  if (!(std::abs(sol.omega0.omega_x) < bound && std::abs(sol.omega1.omega_x) < bound)) {
    d.reasons.push_back(GateReason::PitchOutOfBounds);
  }
  if (!(std::abs(sol.omega0.omega_z) < bound && std::abs(sol.omega1.omega_z) < bound)) {
    d.reasons.push_back(GateReason::RollOutOfBounds);
  }
  if (!(std::abs(sol.d_omega.omega_y) < deg_to_rad(cfg.max_rel_pan_deg))) {
    d.reasons.push_back(GateReason::RelPanOutOfBounds);
  }
  d.outcome = d.reasons.empty() ? GateOutcome::Stereo : GateOutcome::MonoFallback;
  return d;
}

GateDecision solver_failure_decision(bool too_few, std::size_t match_count,
                                     const GateConfig& cfg) {
  GateDecision d;
  d.outcome = GateOutcome::MonoFallback;
  if (too_few || match_count < static_cast<std::size_t>(cfg.min_matches)) {
    d.reasons.push_back(GateReason::TooFewMatches);
  }
  if (!too_few) d.reasons.push_back(GateReason::SolverDegenerate);
  return d;
}

}  // namespace rigfix
