#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "rigfix/camera_model.hpp"
#include "rigfix/correspondence.hpp"

namespace rigfix {

/// Parameter families, each a column subset of the full vertical-disparity
/// constraint with unknowns (dwx, dwy, dwz, wy1, wz1, df).
enum class ModelKind {
  ThreeParam,  // dw
  FourParam,   // dw, df
  FiveParam,   // dw, wy1, df
  SixParam,    // dw, wy1, wz1, df
};

std::string_view to_string(ModelKind kind);
/// Accepts "3-param" .. "6-param" (and bare digits). Throws ConfigError.
ModelKind model_kind_from_string(std::string_view name);

/// Indices into the full six-column row used by a model, in order.
std::span<const int> model_columns(ModelKind kind);
std::size_t parameter_count(ModelKind kind);

inline constexpr int kColDwx = 0;
inline constexpr int kColDwy = 1;
inline constexpr int kColDwz = 2;
inline constexpr int kColWy1 = 3;
inline constexpr int kColWz1 = 4;
inline constexpr int kColDf = 5;

/// Name of a full-row column ("d_omega_x", ..., "d_f").
std::string_view column_name(int column);

struct ConstraintRow {
  std::vector<double> coefficients;
  double rhs = 0.0;  // dy, normalized units
  std::size_t source = 0;
};

/// [1 + y0*y1, -x0*y1, -x0, -dx*y1, -dx, y0] . theta = dy, with dx standing
/// in for the inverse depth.
ConstraintRow row_full(const Match& m, std::size_t source = 0);

/// [1 + y0*y1, -x0*y1, -x0, y0] . (dw, df) = dy; independent of depth.
ConstraintRow row_reduced(const Match& m, std::size_t source = 0);

ConstraintRow row_for_model(const Match& m, ModelKind kind, std::size_t source = 0);

/// Horizontal companion row [-y0*x1, 1 + x0*x1, -y0, dx*x1, 0, -x1] . theta = 0
/// from the same cross-multiplication. Diagnostic only; never solved.
ConstraintRow row_horizontal(const Match& m, std::size_t source = 0);

/// Dense least squares via SVD. Throws TooFewMatchesError when there are
/// fewer rows than unknowns and DegenerateGeometryError (naming the
/// dominant parameter of the null direction) when the design is rank
/// deficient. `names` labels the columns for that message.
std::vector<double> lsq_solve(std::span<const ConstraintRow> rows,
                              std::span<const std::string_view> names = {});

struct SolverConfig {
  /// Inlier thresholds in pixels, strictly decreasing.
  std::vector<double> thresholds_px{4.0, 2.0, 1.0};
  /// Minimum rows per solve, as a multiple of the parameter count.
  int min_matches_factor = 3;
  /// Cap on solves per stage; 0 means the schedule length.
  int max_iterations = 0;
  ModelKind model = ModelKind::FourParam;
  /// Minimum spread of inlier dx (pixels) before absolute pan/roll are solved.
  double min_dx_spread_px = 20.0;

  void validate() const;
};

struct RectificationSolution {
  ModelKind model = ModelKind::FourParam;
  Rotation3 d_omega;
  std::optional<double> omega_y1;
  std::optional<double> omega_z1;
  double d_f = 0.0;
  Rotation3 omega0;
  Rotation3 omega1;
  std::size_t match_count = 0;
  std::size_t inlier_count = 0;
  double inlier_rate = 0.0;
  /// RMS residual over the final inliers, normalized units.
  double rms_dy_inliers = 0.0;
  /// Focal length used to convert to pixels.
  double focal_px = 1.0;
  std::size_t iterations = 0;
  /// Thresholds actually applied, in order, across both stages.
  std::vector<double> thresholds_used_px;
  /// |residual| per match in pixels, after applying the solution.
  std::vector<double> abs_residuals_px;

  /// Full six-entry parameter vector; absent absolutes are zero.
  std::vector<double> parameters() const;
};

/// Residual of each match's model row: coeffs . theta - dy (normalized).
/// theta has parameter_count(kind) entries.
std::vector<double> residuals(const MatchSet& matches, std::span<const double> theta,
                              ModelKind kind);

/// Residuals of the horizontal diagnostic row for a full six-vector.
std::vector<double> horizontal_residuals(const MatchSet& matches, std::span<const double> theta6);

/// Per-camera corrections. Pitch is always split evenly; pan and roll are
/// split evenly unless the absolute right-camera angle is given, in which
/// case omega0 = omega1 - d_omega.
std::pair<Rotation3, Rotation3> split_corrections(const Rotation3& d_omega,
                                                  std::optional<double> omega_y1,
                                                  std::optional<double> omega_z1);

/// Two-stage robust solve with a decreasing inlier-threshold schedule:
/// stage one fits dw and df (or dw alone for ThreeParam); Five/SixParam then
/// refit the full model starting from the stage-one inliers.
RectificationSolution robust_solve(const MatchSet& matches, const SolverConfig& cfg);

}  // namespace rigfix
