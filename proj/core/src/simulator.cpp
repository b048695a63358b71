#include "rigfix/simulator.hpp"

#include <cmath>

#include "rigfix/error.hpp"
#include "rigfix/random.hpp"

namespace rigfix {
namespace {

constexpr std::uint64_t kRenderStream = 0x52454E4445524D41ULL;

RigTruth draw_truth(const SimConfig& cfg, Xorshift64Star& rng) {
  const double m = deg_to_rad(cfg.omega_max_deg);
  const double a = deg_to_rad(cfg.abs_offset_max_deg);
  const Rotation3 dw{rng.uniform(-m, m), rng.uniform(-m, m), rng.uniform(-m, m)};
  const double pan = rng.uniform(-a, a);
  const double roll = rng.uniform(-a, a);
  const double df = rng.uniform(-cfg.df_max, cfg.df_max);
  return RigTruth::from_relative(dw, df, pan, roll);
}

Vec3 homogeneous_xyz(const ScenePoint& p) { return {p.X, p.Y, p.Z}; }

}  // namespace

RigTruth RigTruth::from_relative(const Rotation3& d_omega, double d_f, double pan_offset,
                                 double roll_offset) {
  const Rotation3 offset{0.0, pan_offset, roll_offset};
  RigTruth t;
  t.omega1 = 0.5 * d_omega + offset;
  t.omega0 = (-0.5) * d_omega + offset;
  t.d_f = d_f;
  return t;
}

void SimConfig::validate() const {
  if (point_count <= 0) throw ConfigError("point_count must be positive");
  if (!(d_min >= 0.0) || !(d_max >= d_min) || !std::isfinite(d_max)) {
    throw ConfigError("disparity range must satisfy 0 <= d_min <= d_max");
  }
  if (width <= 0 || height <= 0) throw ConfigError("image box must be non-empty");
  k0.validate();
  k1.validate();
  if (!(omega_max_deg >= 0.0) || !(abs_offset_max_deg >= 0.0) || !(df_max >= 0.0) ||
      !(df_max < 1.0)) {
    throw ConfigError("misalignment ranges must be non-negative (df_max < 1)");
  }
  if (!(noise_sigma_px >= 0.0) || !(outlier_amplitude_px >= 0.0)) {
    throw ConfigError("noise parameters must be non-negative");
  }
  if (!(outlier_rate >= 0.0 && outlier_rate < 1.0)) {
    throw ConfigError("outlier_rate must lie in [0, 1)");
  }
  if (truth && !(1.0 + truth->d_f > 0.0)) throw ConfigError("truth d_f must exceed -1");
}

SceneTruth generate_scene(const SimConfig& cfg) {
  cfg.validate();
  Xorshift64Star rng(cfg.seed);
  const RigTruth truth = cfg.truth ? *cfg.truth : draw_truth(cfg, rng);

  SceneTruth scene;
  scene.true_omega0 = truth.omega0;
  scene.true_omega1 = truth.omega1;
  scene.true_df = truth.d_f;
  scene.k0 = cfg.k0;
  scene.k1 = cfg.k1;
  scene.width = cfg.width;
  scene.height = cfg.height;
  scene.noise_sigma_px = cfg.noise_sigma_px;
  scene.outlier_rate = cfg.outlier_rate;
  scene.outlier_amplitude_px = cfg.outlier_amplitude_px;
  scene.seed = cfg.seed;

  const Mat3 r0 = rotation_exact(truth.omega0);
  scene.points.reserve(static_cast<std::size_t>(cfg.point_count));
  for (int i = 0; i < cfg.point_count; ++i) {
    const double u = rng.uniform(0.0, cfg.width);
    const double v = rng.uniform(0.0, cfg.height);
    const double d = cfg.d_max > cfg.d_min ? rng.uniform(cfg.d_min, cfg.d_max) : cfg.d_min;
    const NormalizedPoint n = pixel_to_normalized({u, v}, cfg.k0);
    const Vec3 ray = r0 * Vec3(n.x, n.y, 1.0);
    scene.points.push_back({ray.x(), ray.y(), ray.z(), d});
  }
  return scene;
}

RenderedMatches render_matches(const SceneTruth& scene, Generation gen) {
  scene.k0.validate();
  scene.k1.validate();
  Xorshift64Star rng(mix64(scene.seed ^ kRenderStream));
  const Rotation3& w0 = scene.true_omega0;
  const Rotation3& w1 = scene.true_omega1;
  const Rotation3 dw = w1 - w0;
  const double scale = 1.0 + scene.true_df;

  RenderedMatches out;
  out.matches.k0 = scene.k0;
  out.matches.k1 = scene.k1;
  out.matches.width = scene.width;
  out.matches.height = scene.height;

  for (const ScenePoint& p : scene.points) {
    NormalizedPoint n0;
    NormalizedPoint n1;
    try {
      if (gen == Generation::Exact) {
        n0 = project_exact(p, w0, kLeftTranslation);
        const NormalizedPoint ideal = project_exact(p, w1, kRightTranslation);
        n1 = {scale * ideal.x, scale * ideal.y};
      } else {
        n0 = project_left(p, w0);
        const Vec3 cam = rotation_linearized(w0) * homogeneous_xyz(p);
        const double d = p.W / cam.z();
        const NormalizedPoint r = reproject_left_to_right(n0, d, w0, w1);
        n1.x = scale * r.x;
        const double dx = n1.x - n0.x;
        n1.y = (n0.y * scale + dw.omega_x - dw.omega_z * n0.x - w1.omega_z * dx) /
               (1.0 - dw.omega_x * n0.y + dw.omega_y * n0.x + w1.omega_y * dx);
      }
    } catch (const BehindCameraError&) {
      ++out.skipped;
      continue;
    }

    PixelPoint left = normalized_to_pixel(n0, scene.k0);
    PixelPoint right = normalized_to_pixel(n1, scene.k1);
    const double s = scene.noise_sigma_px;
    left.u += s * rng.normal();
    left.v += s * rng.normal();
    right.u += s * rng.normal();
    right.v += s * rng.normal();
    const bool is_outlier = rng.bernoulli(scene.outlier_rate);
    if (is_outlier) {
      right.v += rng.uniform(-scene.outlier_amplitude_px, scene.outlier_amplitude_px);
    }
    out.matches.matches.push_back(make_match(left, right, scene.k0, scene.k1));
    out.outlier.push_back(is_outlier);
  }
  return out;
}

ValueNoiseTexture::ValueNoiseTexture(std::uint64_t seed, double base_cell_px, int octaves)
    : seed_(seed), base_cell_(base_cell_px), octaves_(octaves) {
  if (!(base_cell_px > 0.0) || octaves < 1) throw ConfigError("invalid texture parameters");
}

double ValueNoiseTexture::lattice(int octave, std::int64_t ix, std::int64_t iy) const {
  std::uint64_t key = mix64(seed_ ^ (0x9E3779B97F4A7C15ULL * static_cast<std::uint64_t>(octave + 1)));
  key = mix64(key ^ static_cast<std::uint64_t>(ix));
  key = mix64(key ^ static_cast<std::uint64_t>(iy));
  return static_cast<double>(key >> 11) * 0x1.0p-53;
}

double ValueNoiseTexture::sample(double u, double v) const {
  double total = 0.0;
  double norm = 0.0;
  double amplitude = 1.0;
  double cell = base_cell_;
  for (int o = 0; o < octaves_; ++o) {
    const double gu = u / cell;
    const double gv = v / cell;
    const double fu0 = std::floor(gu);
    const double fv0 = std::floor(gv);
    const auto iu = static_cast<std::int64_t>(fu0);
    const auto iv = static_cast<std::int64_t>(fv0);
    const double tu = gu - fu0;
    const double tv = gv - fv0;
    const double top = (1.0 - tu) * lattice(o, iu, iv) + tu * lattice(o, iu + 1, iv);
    const double bottom = (1.0 - tu) * lattice(o, iu, iv + 1) + tu * lattice(o, iu + 1, iv + 1);
    total += amplitude * ((1.0 - tv) * top + tv * bottom);
    norm += amplitude;
    amplitude *= 0.5;
    cell *= 0.5;
  }
  return total / norm;
}

TexturePair render_texture_pair(const SimConfig& cfg, double plane_disparity) {
  if (!(plane_disparity >= 0.0) || !std::isfinite(plane_disparity)) {
    throw ConfigError("plane disparity must be finite and non-negative");
  }
  SimConfig plane_cfg = cfg;
  plane_cfg.d_min = plane_disparity;
  plane_cfg.d_max = plane_disparity;
  TexturePair pair;
  pair.truth = generate_scene(plane_cfg);

  const ValueNoiseTexture texture(cfg.seed);
  const Mat3 r0 = rotation_exact(pair.truth.true_omega0);
  const Mat3 r1 = rotation_exact(pair.truth.true_omega1);
  const double inv_scale = 1.0 / (1.0 + pair.truth.true_df);
  const Intrinsics& k0 = cfg.k0;
  const Intrinsics& k1 = cfg.k1;

  pair.left = GrayImage(cfg.width, cfg.height);
  pair.right = GrayImage(cfg.width, cfg.height);
  for (int v = 0; v < cfg.height; ++v) {
    for (int u = 0; u < cfg.width; ++u) {
      const NormalizedPoint a = pixel_to_normalized({static_cast<double>(u), static_cast<double>(v)}, k0);
      const Vec3 ray0 = r0 * Vec3(a.x, a.y, 1.0);
      pair.left(u, v) = static_cast<float>(texture.sample(k0.f * ray0.x() / ray0.z() + k0.cx,
                                                          k0.f * ray0.y() / ray0.z() + k0.cy));

      const NormalizedPoint b = pixel_to_normalized({static_cast<double>(u), static_cast<double>(v)}, k1);
      const Vec3 ray1 = r1 * Vec3(b.x * inv_scale, b.y * inv_scale, 1.0);
      pair.right(u, v) = static_cast<float>(
          texture.sample(k0.f * (ray1.x() / ray1.z() - plane_disparity) + k0.cx,
                         k0.f * ray1.y() / ray1.z() + k0.cy));
    }
  }
  return pair;
}

}  // namespace rigfix
