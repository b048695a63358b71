#include "rigfix/correspondence.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <optional>
#include <sstream>
#include <string>

#include <Eigen/Dense>

#include "rigfix/error.hpp"

namespace rigfix {

void HarrisConfig::validate() const {
  if (!(k > 0.0) || nms_radius < 0 || max_corners < 0 || !(relative_threshold >= 0.0) ||
      border < 0) {
    throw ConfigError("invalid Harris detector configuration");
  }
}

void MatcherConfig::validate() const {
  if (levels < 1 || patch_radius < 1 || vertical_slack < 0 || refine_radius < 0 ||
      !(lr_tol >= 0.0)) {
    throw ConfigError("invalid matcher configuration");
  }
}

std::vector<Corner> harris_corners(const GrayImage& img, const HarrisConfig& cfg) {
  cfg.validate();
  const int w = img.width();
  const int h = img.height();
  if (w < 16 || h < 16) {
    throw ConfigError("Harris detection needs at least a 16x16 image");
  }

  const auto at = [w](int u, int v) { return static_cast<std::size_t>(v) * w + u; };
  std::vector<double> ixx(img.samples().size(), 0.0);
  std::vector<double> iyy(ixx.size(), 0.0);
  std::vector<double> ixy(ixx.size(), 0.0);
  for (int v = 1; v < h - 1; ++v) {
    for (int u = 1; u < w - 1; ++u) {
      const double gx = (img(u + 1, v - 1) + 2.0 * img(u + 1, v) + img(u + 1, v + 1)) -
                        (img(u - 1, v - 1) + 2.0 * img(u - 1, v) + img(u - 1, v + 1));
      const double gy = (img(u - 1, v + 1) + 2.0 * img(u, v + 1) + img(u + 1, v + 1)) -
                        (img(u - 1, v - 1) + 2.0 * img(u, v - 1) + img(u + 1, v - 1));
      ixx[at(u, v)] = gx * gx;
      iyy[at(u, v)] = gy * gy;
      ixy[at(u, v)] = gx * gy;
    }
  }

  // Separable 5-tap binomial weighting, approximately a Gaussian with sigma 1.
  static constexpr std::array<double, 5> kTaps{1.0 / 16, 4.0 / 16, 6.0 / 16, 4.0 / 16, 1.0 / 16};
  const auto blur = [&](std::vector<double>& field) {
    std::vector<double> tmp(field.size(), 0.0);
    for (int v = 0; v < h; ++v) {
      for (int u = 2; u < w - 2; ++u) {
        double s = 0.0;
        for (int t = -2; t <= 2; ++t) s += kTaps[t + 2] * field[at(u + t, v)];
        tmp[at(u, v)] = s;
      }
    }
    std::fill(field.begin(), field.end(), 0.0);
    for (int v = 2; v < h - 2; ++v) {
      for (int u = 0; u < w; ++u) {
        double s = 0.0;
        for (int t = -2; t <= 2; ++t) s += kTaps[t + 2] * tmp[at(u, v + t)];
        field[at(u, v)] = s;
      }
    }
  };
  blur(ixx);
  blur(iyy);
  blur(ixy);

  const int margin = std::max(cfg.border, 3);
  constexpr double kNone = -std::numeric_limits<double>::infinity();
  std::vector<double> response(ixx.size(), kNone);
  double max_response = 0.0;
  for (int v = margin; v < h - margin; ++v) {
    for (int u = margin; u < w - margin; ++u) {
      const std::size_t i = at(u, v);
      const double det = ixx[i] * iyy[i] - ixy[i] * ixy[i];
      const double tr = ixx[i] + iyy[i];
      response[i] = det - cfg.k * tr * tr;
      max_response = std::max(max_response, response[i]);
    }
  }
  if (!(max_response > 0.0)) return {};

  const double threshold = cfg.relative_threshold * max_response;
  std::vector<Corner> corners;
  for (int v = margin; v < h - margin; ++v) {
    for (int u = margin; u < w - margin; ++u) {
      const std::size_t i = at(u, v);
      const double r = response[i];
      if (!(r > threshold) || !(r > 0.0)) continue;
      bool is_max = true;
      for (int dv = -cfg.nms_radius; dv <= cfg.nms_radius && is_max; ++dv) {
        const int vv = v + dv;
        if (vv < 0 || vv >= h) continue;
        for (int du = -cfg.nms_radius; du <= cfg.nms_radius; ++du) {
          const int uu = u + du;
          if (uu < 0 || uu >= w || (du == 0 && dv == 0)) continue;
          const std::size_t j = at(uu, vv);
          // Equal responses: the earlier pixel in scan order wins.
          if (response[j] > r || (response[j] == r && j < i)) {
            is_max = false;
            break;
          }
        }
      }
      if (is_max) corners.push_back({static_cast<double>(u), static_cast<double>(v), r});
    }
  }

  std::stable_sort(corners.begin(), corners.end(),
                   [](const Corner& a, const Corner& b) { return a.score > b.score; });
  if (corners.size() > static_cast<std::size_t>(cfg.max_corners)) {
    corners.resize(static_cast<std::size_t>(cfg.max_corners));
  }
  return corners;
}

std::vector<GrayImage> build_pyramid(const GrayImage& img, int levels) {
  if (levels < 1) throw ConfigError("pyramid needs at least one level");
  const int shrink = 1 << (levels - 1);
  if (img.width() / shrink < 16 || img.height() / shrink < 16) {
    throw ConfigError("too many pyramid levels (" + std::to_string(levels) + ") for a " +
                      std::to_string(img.width()) + "x" + std::to_string(img.height()) + " image");
  }
  std::vector<GrayImage> pyramid;
  pyramid.reserve(static_cast<std::size_t>(levels));
  pyramid.push_back(img);
  for (int k = 1; k < levels; ++k) {
    const GrayImage& fine = pyramid.back();
    GrayImage coarse(fine.width() / 2, fine.height() / 2);
    for (int v = 0; v < coarse.height(); ++v) {
      for (int u = 0; u < coarse.width(); ++u) {
        coarse(u, v) = 0.25f * (fine(2 * u, 2 * v) + fine(2 * u + 1, 2 * v) +
                                fine(2 * u, 2 * v + 1) + fine(2 * u + 1, 2 * v + 1));
      }
    }
    pyramid.push_back(std::move(coarse));
  }
  return pyramid;
}

namespace {

bool patch_inside(const GrayImage& img, Pixel p, int r) {
  return p.u - r >= 0 && p.v - r >= 0 && p.u + r < img.width() && p.v + r < img.height();
}

// Zero-mean patch around a pixel, stored row-major.
class PatchTemplate {
 public:
  PatchTemplate(const GrayImage& img, Pixel p, int radius) : radius_(radius) {
    values_.reserve(static_cast<std::size_t>((2 * radius + 1) * (2 * radius + 1)));
    double sum = 0.0;
    for (int dv = -radius; dv <= radius; ++dv) {
      for (int du = -radius; du <= radius; ++du) {
        values_.push_back(img(p.u + du, p.v + dv));
        sum += values_.back();
      }
    }
    const double mean = sum / static_cast<double>(values_.size());
    for (double& x : values_) x -= mean;
  }

  double cost(const GrayImage& img, Pixel p) const {
    double sum = 0.0;
    for (int dv = -radius_; dv <= radius_; ++dv) {
      for (int du = -radius_; du <= radius_; ++du) sum += img(p.u + du, p.v + dv);
    }
    const double mean = sum / static_cast<double>(values_.size());
    double ssd = 0.0;
    std::size_t i = 0;
    for (int dv = -radius_; dv <= radius_; ++dv) {
      for (int du = -radius_; du <= radius_; ++du) {
        const double diff = values_[i++] - (img(p.u + du, p.v + dv) - mean);
        ssd += diff * diff;
      }
    }
    return ssd;
  }

 private:
  int radius_;
  std::vector<double> values_;
};

// Vertex offset of the parabola through (-1, cm), (0, c0), (1, cp); zero if
// the fit is flat or not a minimum.
double parabola_offset(double cm, double c0, double cp) {
  const double curvature = cm - 2.0 * c0 + cp;
  if (!(curvature > 0.0)) return 0.0;
  return std::clamp(0.5 * (cm - cp) / curvature, -0.5, 0.5);
}

struct SearchResult {
  Pixel best;
  double cost;
};

std::optional<SearchResult> search_window(const PatchTemplate& tpl, const GrayImage& img,
                                          int u_lo, int u_hi, int v_lo, int v_hi, int r) {
  u_lo = std::max(u_lo, r);
  v_lo = std::max(v_lo, r);
  u_hi = std::min(u_hi, img.width() - 1 - r);
  v_hi = std::min(v_hi, img.height() - 1 - r);
  std::optional<SearchResult> out;
  for (int v = v_lo; v <= v_hi; ++v) {
    for (int u = u_lo; u <= u_hi; ++u) {
      const double c = tpl.cost(img, {u, v});
      if (!out || c < out->cost) out = SearchResult{{u, v}, c};
    }
  }
  return out;
}

MatchSet match_with_pyramids(const std::vector<GrayImage>& from, const std::vector<GrayImage>& to,
                             std::span<const Pixel> starts, const MatcherConfig& cfg,
                             const Intrinsics& k_from, const Intrinsics& k_to,
                             std::vector<Pixel>* argmins = nullptr) {
  const int levels = cfg.levels;
  const int r = cfg.patch_radius;
  MatchSet out;
  out.width = from.front().width();
  out.height = from.front().height();
  out.k0 = k_from;
  out.k1 = k_to;
  out.matches.reserve(starts.size());

  for (const Pixel& start : starts) {
    if (!patch_inside(from.front(), start, r)) continue;
    Pixel disp{0, 0};
    std::optional<SearchResult> found;
    bool ok = true;
    for (int k = levels - 1; k >= 0 && ok; --k) {
      const int s = 1 << k;
      const Pixel pk{start.u / s, start.v / s};
      if (!patch_inside(from[k], pk, r)) {
        ok = false;
        break;
      }
      const PatchTemplate tpl(from[k], pk, r);
      if (k == levels - 1) {
        const int u_lo = cfg.coarse_range < 0 ? 0 : pk.u - cfg.coarse_range;
        const int u_hi = cfg.coarse_range < 0 ? to[k].width() - 1 : pk.u + cfg.coarse_range;
        found = search_window(tpl, to[k], u_lo, u_hi, pk.v - cfg.vertical_slack,
                              pk.v + cfg.vertical_slack, r);
      } else {
        const int cu = pk.u + 2 * disp.u;
        const int cv = pk.v + 2 * disp.v;
        found = search_window(tpl, to[k], cu - cfg.refine_radius, cu + cfg.refine_radius,
                              cv - cfg.vertical_slack, cv + cfg.vertical_slack, r);
      }
      if (!found) {
        ok = false;
        break;
      }
      disp = {found->best.u - pk.u, found->best.v - pk.v};
    }
    if (!ok) continue;

    const GrayImage& fine_from = from.front();
    const GrayImage& fine_to = to.front();
    const PatchTemplate tpl(fine_from, start, r);
    const Pixel b = found->best;
    double du = 0.0;
    double dv = 0.0;
    if (patch_inside(fine_to, {b.u - 1, b.v}, r) && patch_inside(fine_to, {b.u + 1, b.v}, r)) {
      du = parabola_offset(tpl.cost(fine_to, {b.u - 1, b.v}), found->cost,
                           tpl.cost(fine_to, {b.u + 1, b.v}));
    }
    if (patch_inside(fine_to, {b.u, b.v - 1}, r) && patch_inside(fine_to, {b.u, b.v + 1}, r)) {
      dv = parabola_offset(tpl.cost(fine_to, {b.u, b.v - 1}), found->cost,
                           tpl.cost(fine_to, {b.u, b.v + 1}));
    }
    out.matches.push_back(make_match(PixelPoint{static_cast<double>(start.u),
                                                static_cast<double>(start.v)},
                                     PixelPoint{b.u + du, b.v + dv}, k_from, k_to, found->cost));
    if (argmins) argmins->push_back(b);
  }
  return out;
}

}  // namespace

double zssd_cost(const GrayImage& left, const GrayImage& right, Pixel pl, Pixel pr, int radius) {
  if (radius < 0) throw ConfigError("patch radius must be non-negative");
  if (!patch_inside(left, pl, radius) || !patch_inside(right, pr, radius)) {
    throw BoundaryError("ZSSD patch extends outside the image");
  }
  return PatchTemplate(left, pl, radius).cost(right, pr);
}

Match make_match(const PixelPoint& left, const PixelPoint& right, const Intrinsics& k0,
                 const Intrinsics& k1, double cost) {
  Match m;
  m.left = left;
  m.right = right;
  m.n0 = pixel_to_normalized(left, k0);
  m.n1 = pixel_to_normalized(right, k1);
  m.dx = m.n1.x - m.n0.x;
  m.dy = m.n1.y - m.n0.y;
  m.cost = cost;
  return m;
}

Match make_match(const NormalizedPoint& n0, const NormalizedPoint& n1, const Intrinsics& k0,
                 const Intrinsics& k1, double cost) {
  Match m;
  m.n0 = n0;
  m.n1 = n1;
  m.left = normalized_to_pixel(n0, k0);
  m.right = normalized_to_pixel(n1, k1);
  m.dx = n1.x - n0.x;
  m.dy = n1.y - n0.y;
  m.cost = cost;
  return m;
}

MatchSet match_one_way(const GrayImage& from, const GrayImage& to, std::span<const Pixel> starts,
                       const MatcherConfig& cfg, const Intrinsics& k_from, const Intrinsics& k_to) {
  cfg.validate();
  if (from.width() != to.width() || from.height() != to.height()) {
    throw ConfigError("stereo images must have identical dimensions");
  }
  return match_with_pyramids(build_pyramid(from, cfg.levels), build_pyramid(to, cfg.levels),
                             starts, cfg, k_from, k_to);
}

namespace {

using ReverseIndex = std::map<std::pair<long, long>, const Match*>;

ReverseIndex index_by_origin(const MatchSet& reverse) {
  ReverseIndex by_origin;
  for (const Match& r : reverse.matches) {
    by_origin.emplace(std::pair{std::lround(r.left.u), std::lround(r.left.v)}, &r);
  }
  return by_origin;
}

// Reverse match of f when it returns within tol of f's left corner.
const Match* consistent_reverse(const ReverseIndex& by_origin, const Match& f, double tol) {
  const auto it = by_origin.find({std::lround(f.right.u), std::lround(f.right.v)});
  if (it == by_origin.end()) return nullptr;
  const double eu = it->second->right.u - f.left.u;
  const double ev = it->second->right.v - f.left.v;
  return std::hypot(eu, ev) <= tol ? it->second : nullptr;
}

}  // namespace

MatchSet left_right_filter(const MatchSet& forward, const MatchSet& reverse, double tol) {
  const ReverseIndex by_origin = index_by_origin(reverse);
  MatchSet kept = forward;
  kept.matches.clear();
  for (const Match& f : forward.matches) {
    if (consistent_reverse(by_origin, f, tol)) kept.matches.push_back(f);
  }
  return kept;
}

MatchSet match_hierarchical(const GrayImage& left, const GrayImage& right,
                            std::span<const Corner> corners, const MatcherConfig& cfg,
                            const Intrinsics& k0, const Intrinsics& k1) {
  cfg.validate();
  if (left.width() != right.width() || left.height() != right.height()) {
    throw ConfigError("stereo images must have identical dimensions");
  }
  const auto pyr_left = build_pyramid(left, cfg.levels);
  const auto pyr_right = build_pyramid(right, cfg.levels);

  std::vector<Pixel> starts;
  starts.reserve(corners.size());
  for (const Corner& c : corners) {
    starts.push_back({static_cast<int>(std::lround(c.u)), static_cast<int>(std::lround(c.v))});
  }
  std::vector<Pixel> argmins;
  const MatchSet forward = match_with_pyramids(pyr_left, pyr_right, starts, cfg, k0, k1, &argmins);

  std::vector<Pixel> back_starts;
  back_starts.reserve(forward.size());
  for (const Match& m : forward.matches) {
    back_starts.push_back(
        {static_cast<int>(std::lround(m.right.u)), static_cast<int>(std::lround(m.right.v))});
  }
  const MatchSet reverse = match_with_pyramids(pyr_right, pyr_left, back_starts, cfg, k1, k0);

  // Survivors take the mean of the forward displacement and the negated
  // reverse one, kept within 0.5 px of the forward integer argmin. The
  // parabola bias from patch curvature flips sign between the two
  // directions, so integer shifts come out exact.
  const ReverseIndex by_origin = index_by_origin(reverse);
  MatchSet kept = forward;
  kept.matches.clear();
  for (std::size_t i = 0; i < forward.size(); ++i) {
    const Match& f = forward.matches[i];
    const Match* r = consistent_reverse(by_origin, f, cfg.lr_tol);
    if (!r) continue;
    const Pixel b = argmins[i];
    const double u = 0.5 * (f.right.u + r->left.u + f.left.u - r->right.u);
    const double v = 0.5 * (f.right.v + r->left.v + f.left.v - r->right.v);
    kept.matches.push_back(make_match(
        f.left, PixelPoint{std::clamp(u, b.u - 0.5, b.u + 0.5), std::clamp(v, b.v - 0.5, b.v + 0.5)},
        k0, k1, f.cost));
  }
  return kept;
}

namespace {

void append_number(std::string& out, double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  out += buf;
}

std::vector<std::array<double, 11>> parse_csv_rows(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) throw IoError("empty match CSV");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "u0,v0,u1,v1,x0,y0,x1,y1,dx,dy,cost") {
    throw IoError("unexpected match CSV header: " + line);
  }
  std::vector<std::array<double, 11>> rows;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::array<double, 11> row{};
    std::size_t pos = 0;
    for (std::size_t c = 0; c < row.size(); ++c) {
      const std::size_t end = line.find(',', pos);
      const std::string field = line.substr(pos, end == std::string::npos ? end : end - pos);
      char* tail = nullptr;
      row[c] = std::strtod(field.c_str(), &tail);
      if (field.empty() || tail == field.c_str() || *tail != '\0' || !std::isfinite(row[c])) {
        throw IoError("malformed match CSV field on line " + std::to_string(line_no));
      }
      if ((end == std::string::npos) != (c + 1 == row.size())) {
        throw IoError("wrong column count on match CSV line " + std::to_string(line_no));
      }
      pos = end + 1;
    }
    rows.push_back(row);
  }
  return rows;
}

}  // namespace

std::string matches_to_csv(const MatchSet& set) {
  std::string out = "u0,v0,u1,v1,x0,y0,x1,y1,dx,dy,cost\n";
  for (const Match& m : set.matches) {
    const double fields[] = {m.left.u, m.left.v, m.right.u, m.right.v, m.n0.x, m.n0.y,
                             m.n1.x,   m.n1.y,   m.dx,      m.dy,      m.cost};
    for (std::size_t i = 0; i < std::size(fields); ++i) {
      if (i) out += ',';
      append_number(out, fields[i]);
    }
    out += '\n';
  }
  return out;
}

MatchSet matches_from_csv(const std::string& text, const Intrinsics& k0, const Intrinsics& k1) {
  MatchSet set;
  set.k0 = k0;
  set.k1 = k1;
  for (const auto& row : parse_csv_rows(text)) {
    Match m;
    m.left = {row[0], row[1]};
    m.right = {row[2], row[3]};
    m.n0 = {row[4], row[5]};
    // dx and dy carry more absolute precision than x1 - x0 at 9 digits.
    m.dx = row[8];
    m.dy = row[9];
    m.n1 = {m.n0.x + m.dx, m.n0.y + m.dy};
    m.cost = row[10];
    set.matches.push_back(m);
  }
  return set;
}

bool infer_intrinsics(const std::string& csv_text, Intrinsics& k0, Intrinsics& k1) {
  const auto rows = parse_csv_rows(csv_text);
  if (rows.size() < 3) return false;
  const auto fit = [&rows](int pu, int pv, int nx, int ny, Intrinsics& k) {
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(2 * static_cast<Eigen::Index>(rows.size()), 3);
    Eigen::VectorXd b(a.rows());
    for (std::size_t i = 0; i < rows.size(); ++i) {
      const auto r = static_cast<Eigen::Index>(2 * i);
      a(r, 0) = rows[i][nx];
      a(r, 1) = 1.0;
      b(r) = rows[i][pu];
      a(r + 1, 0) = rows[i][ny];
      a(r + 1, 2) = 1.0;
      b(r + 1) = rows[i][pv];
    }
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(a);
    if (qr.rank() < 3) return false;
    const Eigen::Vector3d sol = qr.solve(b);
    if (!(sol(0) > 0.0)) return false;
    k = {sol(0), sol(1), sol(2)};
    return true;
  };
  Intrinsics a;
  Intrinsics b;
  if (!fit(0, 1, 4, 5, a) || !fit(2, 3, 6, 7, b)) return false;
  k0 = a;
  k1 = b;
  return true;
}

}  // namespace rigfix
