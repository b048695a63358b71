#include "rigfix/rectifier.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Dense>

#include "rigfix/error.hpp"

namespace rigfix {
namespace {

Mat3 k_matrix(const Intrinsics& k) {
  Mat3 m;
  m << k.f, 0.0, k.cx, 0.0, k.f, k.cy, 0.0, 0.0, 1.0;
  return m;
}

Mat3 k_inverse(const Intrinsics& k) {
  Mat3 m;
  m << 1.0 / k.f, 0.0, -k.cx / k.f, 0.0, 1.0 / k.f, -k.cy / k.f, 0.0, 0.0, 1.0;
  return m;
}

// Normalized-coordinate map from observed to rectified rays.
Mat3 normalized_correction(const Rotation3& w, double scale) {
  const Vec3 inv(1.0 / scale, 1.0 / scale, 1.0);
  return rotation_exact(w) * inv.asDiagonal();
}

double median_of(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

}  // namespace

std::pair<RectifyMap, RectifyMap> build_maps(const Intrinsics& k0, const Intrinsics& k1,
                                             const RectificationSolution& sol) {
  k0.validate();
  k1.validate();
  if (!std::isfinite(sol.d_f) || !(1.0 + sol.d_f > 0.0)) {
    throw ConfigError("focal scale correction must keep 1 + d_f positive");
  }
  const Intrinsics out0 = k0;
  const Intrinsics out1{k0.f, k1.cx, k0.cy};

  RectifyMap left;
  left.input = k0;
  left.output = out0;
  const bool left_identity = sol.omega0 == Rotation3{};
  left.homography = left_identity ? Mat3::Identity()
                                  : Mat3(k_matrix(out0) * normalized_correction(sol.omega0, 1.0) *
                                         k_inverse(k0));

  RectifyMap right;
  right.input = k1;
  right.output = out1;
  const bool right_identity = sol.omega1 == Rotation3{} && sol.d_f == 0.0 && k1 == out1;
  right.homography =
      right_identity ? Mat3::Identity()
                     : Mat3(k_matrix(out1) * normalized_correction(sol.omega1, 1.0 + sol.d_f) *
                            k_inverse(k1));
  if (!left.homography.allFinite() || !right.homography.allFinite()) {
    throw ConfigError("rectifying homography is not finite");
  }
  return {left, right};
}

WarpedImage warp(const GrayImage& img, const RectifyMap& map) {
  const int w = img.width();
  const int h = img.height();
  WarpedImage out{GrayImage(w, h), ValidityMask{w, h, std::vector<std::uint8_t>(img.samples().size(), 0)}};
  const Eigen::FullPivLU<Mat3> lu(map.homography);
  if (!lu.isInvertible()) throw ConfigError("rectifying homography is singular");
  const Mat3 inv = map.homography == Mat3::Identity() ? Mat3::Identity() : Mat3(lu.inverse());

  for (int v = 0; v < h; ++v) {
    for (int u = 0; u < w; ++u) {
      const Vec3 src = inv * Vec3(u, v, 1.0);
      if (!(src.z() > 0.0)) continue;
      const double su = src.x() / src.z();
      const double sv = src.y() / src.z();
      if (!(su >= 0.0 && sv >= 0.0 && su <= w - 1 && sv <= h - 1)) continue;
      const int iu = static_cast<int>(std::floor(su));
      const int iv = static_cast<int>(std::floor(sv));
      const double fu = su - iu;
      const double fv = sv - iv;
      const int iu1 = fu > 0.0 ? iu + 1 : iu;
      const int iv1 = fv > 0.0 ? iv + 1 : iv;
      const double top = (1.0 - fu) * img(iu, iv) + fu * img(iu1, iv);
      const double bottom = (1.0 - fu) * img(iu, iv1) + fu * img(iu1, iv1);
      out.image(u, v) = static_cast<float>((1.0 - fv) * top + fv * bottom);
      out.mask.valid[static_cast<std::size_t>(v) * w + u] = 1;
    }
  }
  return out;
}

Rect max_valid_rect(const ValidityMask& mask) {
  // Largest rectangle under the per-column run-length histogram of each row.
  std::vector<int> heights(static_cast<std::size_t>(mask.width), 0);
  Rect best;
  long best_area = 0;
  std::vector<int> stack;
  for (int v = 0; v < mask.height; ++v) {
    for (int u = 0; u < mask.width; ++u) heights[u] = mask(u, v) ? heights[u] + 1 : 0;
    stack.clear();
    for (int u = 0; u <= mask.width; ++u) {
      const int cur = u < mask.width ? heights[u] : 0;
      while (!stack.empty() && heights[stack.back()] >= cur) {
        const int hgt = heights[stack.back()];
        stack.pop_back();
        const int left = stack.empty() ? 0 : stack.back() + 1;
        const long area = static_cast<long>(hgt) * (u - left);
        if (area > best_area) {
          best_area = area;
          best = {left, v - hgt + 1, u - left, hgt};
        }
      }
      stack.push_back(u);
    }
  }
  return best;
}

Rect common_valid_rect(const ValidityMask& a, const ValidityMask& b) {
  if (a.width != b.width || a.height != b.height) {
    throw ConfigError("validity masks differ in size");
  }
  ValidityMask both{a.width, a.height, a.valid};
  for (std::size_t i = 0; i < both.valid.size(); ++i) both.valid[i] &= b.valid[i];
  return max_valid_rect(both);
}

GrayImage crop(const GrayImage& img, const Rect& r) {
  if (r.u0 < 0 || r.v0 < 0 || r.width < 0 || r.height < 0 || r.u0 + r.width > img.width() ||
      r.v0 + r.height > img.height()) {
    throw BoundaryError("crop rectangle outside the image");
  }
  GrayImage out(r.width, r.height);
  for (int v = 0; v < r.height; ++v) {
    for (int u = 0; u < r.width; ++u) out(u, v) = img(r.u0 + u, r.v0 + v);
  }
  return out;
}

MatchSet apply_to_matches(const MatchSet& matches, const RectificationSolution& sol) {
  const Mat3 c0 = normalized_correction(sol.omega0, 1.0);
  const Mat3 c1 = normalized_correction(sol.omega1, 1.0 + sol.d_f);
  const Intrinsics out0 = matches.k0;
  const Intrinsics out1{matches.k0.f, matches.k1.cx, matches.k0.cy};

  // Sides whose correction is the identity keep their coordinates verbatim.
  const bool keep0 = sol.omega0 == Rotation3{};
  const bool keep1 = sol.omega1 == Rotation3{} && sol.d_f == 0.0 && out1 == matches.k1;

  MatchSet out = matches;
  out.k0 = out0;
  out.k1 = out1;
  for (Match& m : out.matches) {
    if (!keep0) {
      m.n0 = dehomogenize(c0 * Vec3(m.n0.x, m.n0.y, 1.0));
      m.left = normalized_to_pixel(m.n0, out0);
    }
    if (!keep1) {
      m.n1 = dehomogenize(c1 * Vec3(m.n1.x, m.n1.y, 1.0));
      m.right = normalized_to_pixel(m.n1, out1);
    }
    if (!keep0 || !keep1) {
      m.dx = m.n1.x - m.n0.x;
      m.dy = m.n1.y - m.n0.y;
    }
  }
  return out;
}

DisparityStats stats(const MatchSet& matches, double f) {
  if (matches.empty()) throw ConfigError("disparity statistics need at least one match");
  if (!(f > 0.0)) throw InvalidIntrinsicsError("focal length must be positive");
  DisparityStats s;
  s.count = matches.size();
  std::vector<double> abs_dy;
  std::vector<double> dx;
  abs_dy.reserve(s.count);
  dx.reserve(s.count);
  double ss = 0.0;
  std::size_t below = 0;
  for (const Match& m : matches.matches) {
    const double dy_px = m.dy * f;
    abs_dy.push_back(std::abs(dy_px));
    dx.push_back(m.dx * f);
    ss += dy_px * dy_px;
    if (std::abs(dy_px) < 1.0) ++below;
  }
  s.fraction_dy_below_1px = static_cast<double>(below) / static_cast<double>(s.count);
  s.median_abs_dy_px = median_of(abs_dy);
  s.rms_dy_px = std::sqrt(ss / static_cast<double>(s.count));
  std::sort(dx.begin(), dx.end());
  const std::size_t decile = std::max<std::size_t>(1, (s.count + 9) / 10);
  s.dx_at_infinity_px = median_of({dx.begin(), dx.begin() + static_cast<std::ptrdiff_t>(decile)});
  return s;
}

}  // namespace rigfix
