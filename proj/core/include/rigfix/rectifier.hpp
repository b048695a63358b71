#pragma once

#include <utility>

#include "rigfix/camera_model.hpp"
#include "rigfix/correspondence.hpp"
#include "rigfix/image.hpp"
#include "rigfix/solver.hpp"

namespace rigfix {

/// Pixel homography from an input image to its rectified counterpart:
/// p_out ~ H p_in.
struct RectifyMap {
  Mat3 homography = Mat3::Identity();
  Intrinsics input;
  Intrinsics output;
};

/// Rectifying maps for both cameras. Each camera's observed ray is rotated
/// by the exact R(omega_i); the right camera's normalized coordinates are
/// first divided by (1 + d_f). Both outputs use the left focal length and
/// the left principal-point row, so a zero solution with identical
/// intrinsics gives identity maps.
std::pair<RectifyMap, RectifyMap> build_maps(const Intrinsics& k0, const Intrinsics& k1,
                                             const RectificationSolution& sol);

struct WarpedImage {
  GrayImage image;
  ValidityMask mask;
};

/// Inverse-mapped bilinear warp; samples that fall outside the source are 0
/// and flagged invalid.
WarpedImage warp(const GrayImage& img, const RectifyMap& map);

/// Pixel rectangle [u0, u0 + width) x [v0, v0 + height).
struct Rect {
  int u0 = 0;
  int v0 = 0;
  int width = 0;
  int height = 0;

  friend bool operator==(const Rect&, const Rect&) = default;
};

/// Largest axis-aligned rectangle of valid pixels (ties: first found in
/// row-major scan of the bottom edge).
Rect max_valid_rect(const ValidityMask& mask);

/// Rectangle valid in both masks.
Rect common_valid_rect(const ValidityMask& a, const ValidityMask& b);

GrayImage crop(const GrayImage& img, const Rect& r);

/// Moves every match into the rectified frame defined by build_maps and
/// recomputes dx, dy.
MatchSet apply_to_matches(const MatchSet& matches, const RectificationSolution& sol);

struct DisparityStats {
  std::size_t count = 0;
  double fraction_dy_below_1px = 0.0;
  double median_abs_dy_px = 0.0;
  double rms_dy_px = 0.0;
  /// Median dx over the lowest-dx decile (at least one match).
  double dx_at_infinity_px = 0.0;
};

/// Statistics in pixels (normalized values scaled by f). Throws ConfigError
/// on an empty set.
DisparityStats stats(const MatchSet& matches, double f);

}  // namespace rigfix
