#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "rigfix/camera_model.hpp"
#include "rigfix/correspondence.hpp"
#include "rigfix/image.hpp"

namespace rigfix {

/// True misalignment of the rig. The right camera's observed normalized
/// coordinates are magnified by (1 + d_f).
struct RigTruth {
  Rotation3 omega0;
  Rotation3 omega1;
  double d_f = 0.0;

  Rotation3 d_omega() const { return omega1 - omega0; }

  /// Truth whose absolute angles follow the even split of d_omega, shifted
  /// by a common pan/roll offset.
  static RigTruth from_relative(const Rotation3& d_omega, double d_f, double pan_offset = 0.0,
                                double roll_offset = 0.0);
};

struct SimConfig {
  int point_count = 500;
  /// Inverse-depth range (normalized disparity, baseline 1).
  double d_min = 0.0;
  double d_max = 0.1;
  /// Left-image box that points are sampled in, pixels.
  int width = 640;
  int height = 480;
  Intrinsics k0{500.0, 319.5, 239.5};
  Intrinsics k1{500.0, 319.5, 239.5};
  /// Per-axis bound on |d_omega| when the truth is drawn at random.
  double omega_max_deg = 1.0;
  /// Bound on the common pan/roll offset added to the even split.
  double abs_offset_max_deg = 0.0;
  double df_max = 0.01;
  double noise_sigma_px = 0.2;
  double outlier_rate = 0.0;
  double outlier_amplitude_px = 20.0;
  std::uint64_t seed = 1;
  /// Fixed truth; drawn from the ranges above when absent.
  std::optional<RigTruth> truth;

  void validate() const;
};

struct SceneTruth {
  std::vector<ScenePoint> points;
  Rotation3 true_omega0;
  Rotation3 true_omega1;
  double true_df = 0.0;
  Intrinsics k0;
  Intrinsics k1;
  int width = 0;
  int height = 0;
  double noise_sigma_px = 0.0;
  double outlier_rate = 0.0;
  double outlier_amplitude_px = 0.0;
  std::uint64_t seed = 0;

  RigTruth rig() const { return {true_omega0, true_omega1, true_df}; }
};

/// Deterministic scene: the truth (drawn first), then each point as a
/// uniform left pixel and a uniform inverse depth, back-projected through
/// the exact left rotation. Points with d = 0 lie at infinity (W = 0).
SceneTruth generate_scene(const SimConfig& cfg);

enum class Generation {
  /// Exactly satisfies the six-parameter vertical-disparity constraint.
  Linearized,
  /// Exact rotations, exact dehomogenization.
  Exact,
};

struct RenderedMatches {
  MatchSet matches;
  /// One flag per emitted match.
  std::vector<bool> outlier;
  std::size_t skipped = 0;
};

/// Projects every scene point into both cameras, adds Gaussian pixel noise
/// (sigma on u0, v0, u1, v1) and replaces a Bernoulli(outlier_rate) subset
/// with uniform vertical errors on v1. Points behind a camera are skipped.
RenderedMatches render_matches(const SceneTruth& scene, Generation gen);

/// Four octaves of bilinear value noise, cell size halving and amplitude
/// halving per octave, normalized to [0, 1].
class ValueNoiseTexture {
 public:
  explicit ValueNoiseTexture(std::uint64_t seed, double base_cell_px = 24.0, int octaves = 4);
  double sample(double u, double v) const;

 private:
  double lattice(int octave, std::int64_t ix, std::int64_t iy) const;

  std::uint64_t seed_;
  double base_cell_;
  int octaves_;
};

struct TexturePair {
  GrayImage left;
  GrayImage right;
  SceneTruth truth;
};

/// Renders a fronto-parallel textured plane at the given inverse depth as
/// seen through the rig described by cfg (size, intrinsics, truth, seed).
/// The texture is parameterized so the unrotated left view shows it 1:1.
TexturePair render_texture_pair(const SimConfig& cfg, double plane_disparity);

}  // namespace rigfix
