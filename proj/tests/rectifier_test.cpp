#include <gtest/gtest.h>

#include <Eigen/LU>

#include <cmath>

#include "rigfix/error.hpp"
#include "rigfix/random.hpp"
#include "rigfix/rectifier.hpp"
#include "rigfix/simulator.hpp"
#include "test_images.hpp"

namespace rigfix {
namespace {

const Intrinsics kK{500.0, 319.5, 239.5};

RectificationSolution solution_for(const Rotation3& d_omega, double d_f) {
  RectificationSolution s;
  s.d_omega = d_omega;
  s.d_f = d_f;
  std::tie(s.omega0, s.omega1) = split_corrections(d_omega, std::nullopt, std::nullopt);
  return s;
}

TEST(BuildMaps, ZeroSolutionIsIdentity) {
  const auto [m0, m1] = build_maps(kK, kK, RectificationSolution{});
  EXPECT_LE((m0.homography - Mat3::Identity()).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_LE((m1.homography - Mat3::Identity()).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_EQ(m0.output, kK);
}

TEST(BuildMaps, ScaleOnlyIsPureScaleAboutPrincipalPoint) {
  const auto [m0, m1] = build_maps(kK, kK, solution_for({}, 0.01));
  EXPECT_LE((m0.homography - Mat3::Identity()).cwiseAbs().maxCoeff(), 1e-12);
  const Mat3 h = m1.homography / m1.homography(2, 2);
  const double s = 1.0 / 1.01;
  EXPECT_NEAR(h(0, 0), s, 1e-12);
  EXPECT_NEAR(h(1, 1), s, 1e-12);
  EXPECT_NEAR(h(0, 1), 0.0, 1e-12);
  EXPECT_NEAR(h(2, 0), 0.0, 1e-15);
  EXPECT_NEAR(h(0, 2), kK.cx * (1 - s), 1e-9);
  EXPECT_NEAR(h(1, 2), kK.cy * (1 - s), 1e-9);
}

TEST(BuildMaps, RejectsBadIntrinsics) {
  EXPECT_THROW(build_maps({0.0, 1, 1}, kK, RectificationSolution{}), InvalidIntrinsicsError);
}

TEST(Warp, IdentityIsBitExact) {
  const GrayImage img = testing::shifted_texture(64, 48, 0, 0);
  RectifyMap id;
  id.input = {60, 31.5, 23.5};
  id.output = id.input;
  const auto w = warp(img, id);
  EXPECT_EQ(w.image, img);
  for (auto v : w.mask.valid) EXPECT_EQ(v, 1);
}

TEST(Warp, IntegerTranslation) {
  const GrayImage img = testing::shifted_texture(64, 48, 0, 0);
  RectifyMap t;
  t.homography(0, 2) = 3.0;
  t.homography(1, 2) = -2.0;
  const auto w = warp(img, t);
  for (int v = 0; v < 48; ++v)
    for (int u = 0; u < 64; ++u) {
      const bool inside = u - 3 >= 0 && v + 2 < 48;
      EXPECT_EQ(w.mask(u, v), inside);
      if (inside) {
        EXPECT_EQ(w.image(u, v), img(u - 3, v + 2));
      } else {
        EXPECT_EQ(w.image(u, v), 0.0f);
      }
    }
}

TEST(Warp, RoundTripOnSmoothTexture) {
  const ValueNoiseTexture tex(3, 40.0, 2);
  GrayImage img(160, 120);
  for (int v = 0; v < 120; ++v)
    for (int u = 0; u < 160; ++u) img(u, v) = static_cast<float>(tex.sample(u, v));
  RectifyMap fwd;
  fwd.homography = rotation_exact(Rotation3::from_degrees(0.3, -0.4, 1.5));
  const Intrinsics k{200.0, 79.5, 59.5};
  Mat3 km;
  km << k.f, 0, k.cx, 0, k.f, k.cy, 0, 0, 1;
  fwd.homography = km * fwd.homography * km.inverse();
  RectifyMap back = fwd;
  back.homography = fwd.homography.inverse();
  const auto once = warp(img, fwd);
  const auto twice = warp(once.image, back);
  double ss = 0;
  int n = 0;
  for (int v = 20; v < 100; ++v)
    for (int u = 20; u < 140; ++u) {
      const double d = twice.image(u, v) - img(u, v);
      ss += d * d;
      ++n;
    }
  EXPECT_LE(std::sqrt(ss / n), 2.0 / 255.0);
}

TEST(MaxValidRect, FindsLargestRectangle) {
  ValidityMask m{6, 5, std::vector<std::uint8_t>(30, 0)};
  for (int v = 1; v < 4; ++v)
    for (int u = 1; u < 5; ++u) m.valid[v * 6 + u] = 1;
  m.valid[0] = 1;
  EXPECT_EQ(max_valid_rect(m), (Rect{1, 1, 4, 3}));
  ValidityMask full{4, 3, std::vector<std::uint8_t>(12, 1)};
  EXPECT_EQ(max_valid_rect(full), (Rect{0, 0, 4, 3}));
  ValidityMask empty{4, 3, std::vector<std::uint8_t>(12, 0)};
  EXPECT_EQ(max_valid_rect(empty).width * max_valid_rect(empty).height, 0);
}

TEST(MaxValidRect, CommonAndCrop) {
  ValidityMask a{5, 4, std::vector<std::uint8_t>(20, 1)};
  ValidityMask b = a;
  for (int v = 0; v < 4; ++v) b.valid[v * 5 + 4] = 0;
  a.valid[0] = 0;
  a.valid[1] = 0;
  a.valid[2] = 0;
  a.valid[3] = 0;
  EXPECT_EQ(common_valid_rect(a, b), (Rect{0, 1, 4, 3}));
  GrayImage img(5, 4);
  for (int v = 0; v < 4; ++v)
    for (int u = 0; u < 5; ++u) img(u, v) = static_cast<float>(10 * v + u);
  const GrayImage c = crop(img, {1, 2, 3, 2});
  ASSERT_EQ(c.width(), 3);
  EXPECT_EQ(c(0, 0), 21.0f);
  EXPECT_EQ(c(2, 1), 33.0f);
}

TEST(ApplyToMatches, ZeroSolutionIsIdentity) {
  SimConfig cfg;
  cfg.point_count = 100;
  const auto rendered = render_matches(generate_scene(cfg), Generation::Exact);
  const MatchSet out = apply_to_matches(rendered.matches, RectificationSolution{});
  EXPECT_EQ(matches_to_csv(out), matches_to_csv(rendered.matches));
}

TEST(ApplyToMatches, TrueSolutionCancelsExactData) {
  SimConfig cfg;
  cfg.point_count = 300;
  cfg.noise_sigma_px = 0.0;
  cfg.truth = RigTruth::from_relative(Rotation3::from_degrees(0.4, 0.5, 1.0), 0.005);
  const SceneTruth scene = generate_scene(cfg);
  const auto rendered = render_matches(scene, Generation::Exact);
  const auto sol = solution_for(scene.rig().d_omega(), scene.true_df);
  for (const Match& m : apply_to_matches(rendered.matches, sol).matches) EXPECT_LE(std::abs(m.dy), 1e-9);
}

TEST(ApplyToMatches, AgreesWithReMatchingWarpedImages) {
  SimConfig cfg;
  cfg.width = 320;
  cfg.height = 240;
  cfg.k0 = cfg.k1 = {250.0, 159.5, 119.5};
  cfg.seed = 4;
  cfg.truth = RigTruth::from_relative(Rotation3::from_degrees(0.3, 0.4, 0.8), 0.004);
  const double plane_d = 8.0 / cfg.k0.f;
  const auto pair = render_texture_pair(cfg, plane_d);
  const auto corners = harris_corners(pair.left);
  const MatchSet before = match_hierarchical(pair.left, pair.right, corners, {}, cfg.k0, cfg.k1);
  ASSERT_GE(before.size(), 100u);
  const auto sol = solution_for(pair.truth.rig().d_omega(), pair.truth.true_df);
  const auto [m0, m1] = build_maps(cfg.k0, cfg.k1, sol);
  const auto w0 = warp(pair.left, m0);
  const auto w1 = warp(pair.right, m1);
  // Corners from the common valid region; the black border would dominate
  // the relative response threshold.
  const Rect valid = common_valid_rect(w0.mask, w1.mask);
  auto after_corners = harris_corners(crop(w0.image, valid));
  for (Corner& c : after_corners) {
    c.u += valid.u0;
    c.v += valid.v0;
  }
  const MatchSet rematched =
      match_hierarchical(w0.image, w1.image, after_corners, {}, m0.output, m1.output);
  ASSERT_GE(rematched.size(), 50u);
  const auto transformed = stats(apply_to_matches(before, sol), m0.output.f);
  const auto direct = stats(rematched, m0.output.f);
  EXPECT_NEAR(transformed.median_abs_dy_px, direct.median_abs_dy_px, 0.3);
  EXPECT_NEAR(transformed.rms_dy_px, direct.rms_dy_px, 0.3);
}

TEST(ApplyToMatches, EstimatedSolutionImprovesRmsOnEveryTrial) {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    SimConfig cfg;
    cfg.seed = seed;
    cfg.omega_max_deg = rad_to_deg(0.01);
    cfg.df_max = 0.005;
    const auto rendered = render_matches(generate_scene(cfg), Generation::Exact);
    const auto sol = robust_solve(rendered.matches, {});
    const auto before = stats(rendered.matches, cfg.k1.f);
    const auto after = stats(apply_to_matches(rendered.matches, sol), cfg.k1.f);
    EXPECT_LT(after.rms_dy_px, before.rms_dy_px) << seed;
  }
}

MatchSet dy_set(const std::vector<double>& dy_px, double f = 100.0) {
  MatchSet set;
  const Intrinsics k{f, 0.0, 0.0};
  set.k0 = set.k1 = k;
  double u = 0;
  for (double dy : dy_px) {
    set.matches.push_back(make_match(PixelPoint{u, 10.0}, PixelPoint{u + 3.0, 10.0 + dy}, k, k));
    u += 1.0;
  }
  return set;
}

TEST(Stats, AllZeroDy) {
  const auto s = stats(dy_set({0, 0, 0, 0}), 100.0);
  EXPECT_EQ(s.fraction_dy_below_1px, 1.0);
  EXPECT_EQ(s.median_abs_dy_px, 0.0);
  EXPECT_EQ(s.count, 4u);
}

TEST(Stats, HalfAndHalf) {
  const auto s = stats(dy_set({0.5, 2.0, 0.5, 2.0, -0.5, -2.0}), 100.0);
  EXPECT_NEAR(s.fraction_dy_below_1px, 0.5, 1e-15);
  EXPECT_NEAR(s.median_abs_dy_px, 1.25, 1e-12);
  EXPECT_NEAR(s.rms_dy_px, std::sqrt((3 * 0.25 + 3 * 4.0) / 6), 1e-12);
}

TEST(Stats, DxAtInfinityIsLowestDecileMedian) {
  MatchSet set;
  const Intrinsics k{100.0, 0.0, 0.0};
  for (int i = 0; i < 20; ++i)
    set.matches.push_back(make_match(PixelPoint{0.0, 0.0}, PixelPoint{static_cast<double>(20 - i), 0.0}, k, k));
  EXPECT_NEAR(stats(set, 100.0).dx_at_infinity_px, 1.5, 1e-12);
}

TEST(Stats, VerticalShiftLinksToMedian) {
  const auto base = dy_set({0.0, 0.0, 0.0});
  MatchSet shifted = base;
  for (Match& m : shifted.matches) m = make_match(m.left, PixelPoint{m.right.u, m.right.v + 0.75}, base.k0, base.k1);
  EXPECT_NEAR(stats(shifted, 100.0).median_abs_dy_px - stats(base, 100.0).median_abs_dy_px, 0.75, 1e-12);
}

TEST(Stats, EmptySetIsError) { EXPECT_THROW(stats(MatchSet{}, 1.0), ConfigError); }

}  // namespace
}  // namespace rigfix
