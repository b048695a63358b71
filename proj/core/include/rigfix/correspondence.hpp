#pragma once

#include <span>
#include <string>
#include <vector>

#include "rigfix/camera_model.hpp"
#include "rigfix/image.hpp"

namespace rigfix {

struct Corner {
  double u = 0.0;
  double v = 0.0;
  double score = 0.0;  // Harris response
};

struct HarrisConfig {
  double k = 0.04;
  int nms_radius = 5;
  int max_corners = 2000;
  /// Corners must exceed this fraction of the strongest response.
  double relative_threshold = 0.01;
  /// Pixels excluded at the image border (at least the 3 px filter support).
  int border = 3;

  void validate() const;
};

/// Harris corners from Sobel gradients and a 5x5 Gaussian-weighted structure
/// tensor, non-maximum suppressed within a square of radius nms_radius.
/// Sorted by descending score; ties broken by (v, u). A featureless image
/// yields an empty list.
std::vector<Corner> harris_corners(const GrayImage& img, const HarrisConfig& cfg = {});

/// Level 0 is the input; each further level is a 2x2 box-filtered half-size
/// copy. Throws ConfigError when levels < 1 or the coarsest level would be
/// smaller than 16 px in either dimension.
std::vector<GrayImage> build_pyramid(const GrayImage& img, int levels);

struct Pixel {
  int u = 0;
  int v = 0;
};

/// Zero-mean SSD between the (2r+1)^2 patches centred at pl and pr.
/// Throws BoundaryError if either patch leaves its image.
double zssd_cost(const GrayImage& left, const GrayImage& right, Pixel pl, Pixel pr, int radius);

/// One left/right correspondence. dx = x1 - x0 and dy = y1 - y0 are in
/// normalized units.
struct Match {
  PixelPoint left;
  PixelPoint right;
  NormalizedPoint n0;
  NormalizedPoint n1;
  double dx = 0.0;
  double dy = 0.0;
  double cost = 0.0;
};

/// Builds a Match from pixel positions, normalizing with k0 (left) and k1 (right).
Match make_match(const PixelPoint& left, const PixelPoint& right, const Intrinsics& k0,
                 const Intrinsics& k1, double cost = 0.0);

/// Builds a Match from normalized positions.
Match make_match(const NormalizedPoint& n0, const NormalizedPoint& n1, const Intrinsics& k0,
                 const Intrinsics& k1, double cost = 0.0);

struct MatchSet {
  std::vector<Match> matches;
  int width = 0;
  int height = 0;
  Intrinsics k0;
  Intrinsics k1;

  std::size_t size() const noexcept { return matches.size(); }
  bool empty() const noexcept { return matches.empty(); }
};

struct MatcherConfig {
  int levels = 3;
  int patch_radius = 3;
  /// Vertical search half-range in pixels, applied at every level.
  int vertical_slack = 2;
  /// Horizontal search half-range at the finer levels.
  int refine_radius = 2;
  /// Horizontal half-range at the coarsest level in coarse pixels; a
  /// negative value searches the full row.
  int coarse_range = -1;
  /// Left-right consistency tolerance in pixels.
  double lr_tol = 1.0;

  void validate() const;
};

/// Coarse-to-fine ZSSD search for every start point, without consistency
/// filtering. `starts` index pixels of `from`; results are in the order of
/// the start points, skipping those that cannot be matched.
MatchSet match_one_way(const GrayImage& from, const GrayImage& to, std::span<const Pixel> starts,
                       const MatcherConfig& cfg, const Intrinsics& k_from, const Intrinsics& k_to);

/// Keeps the forward matches whose reverse match, started from the rounded
/// forward target, lands within tol pixels of the forward origin.
MatchSet left_right_filter(const MatchSet& forward, const MatchSet& reverse, double tol);

/// Forward matching of the corners, reverse matching from each target, and
/// left-right filtering. A surviving match's subpixel displacement is the
/// mean of the forward and negated reverse estimates, clamped to within
/// 0.5 px of the forward integer argmin.
MatchSet match_hierarchical(const GrayImage& left, const GrayImage& right,
                            std::span<const Corner> corners, const MatcherConfig& cfg,
                            const Intrinsics& k0, const Intrinsics& k1);

/// CSV with header u0,v0,u1,v1,x0,y0,x1,y1,dx,dy,cost at 9 significant digits.
std::string matches_to_csv(const MatchSet& set);

/// Parses the CSV format above; image size is left at zero and the
/// intrinsics are taken from the arguments. Throws IoError on malformed input.
MatchSet matches_from_csv(const std::string& text, const Intrinsics& k0, const Intrinsics& k1);

/// Estimates (f, cx, cy) for one side of a parsed CSV by least squares on
/// pixel vs normalized columns. Returns false when the rows do not span
/// enough distinct positions.
bool infer_intrinsics(const std::string& csv_text, Intrinsics& k0, Intrinsics& k1);

}  // namespace rigfix
