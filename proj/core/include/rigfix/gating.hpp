#pragma once

#include <string_view>
#include <vector>

#include "rigfix/solver.hpp"

namespace rigfix {

struct GateConfig {
  int min_matches = 100;
  double min_inlier_rate = 0.60;
  /// Inlier bound on |dy| after correction, pixels.
  double inlier_dy_px = 1.0;
  double max_abs_pitch_roll_deg = 5.0;
  double max_rel_pan_deg = 22.0;

  void validate() const;
};

enum class GateOutcome { Stereo, MonoFallback };

enum class GateReason {
  TooFewMatches,
  LowInlierRate,
  PitchOutOfBounds,
  RollOutOfBounds,
  RelPanOutOfBounds,
  SolverDegenerate,
};

std::string_view to_string(GateOutcome outcome);
std::string_view to_string(GateReason reason);

struct GateDecision {
  GateOutcome outcome = GateOutcome::Stereo;
  std::vector<GateReason> reasons;

  bool stereo() const noexcept { return outcome == GateOutcome::Stereo; }
  bool has(GateReason r) const;
};

/// Applies every acceptance criterion and accumulates all failures.
/// Counts and rates are inclusive ("at least"); angle bounds are strict.
/// When the solution carries per-match residuals the inlier rate is
/// recounted at cfg.inlier_dy_px, otherwise sol.inlier_rate is used.
GateDecision evaluate(const RectificationSolution& sol, const GateConfig& cfg = {});

/// Decision for a solve that threw: TooFewMatches for TooFewMatchesError,
/// SolverDegenerate otherwise. `match_count` adds TooFewMatches when short.
GateDecision solver_failure_decision(bool too_few, std::size_t match_count,
                                     const GateConfig& cfg = {});

}  // namespace rigfix
