// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any failure.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iterator>
#include <span>
#include <string>
#include <vector>

#include "rigfix/correspondence.hpp"
#include "rigfix/error.hpp"
#include "rigfix/gating.hpp"
#include "rigfix/random.hpp"
#include "rigfix/rectifier.hpp"
#include "rigfix/simulator.hpp"
#include "rigfix/solver.hpp"
#include "test_images.hpp"

#ifndef RIGFIX_CLI_PATH
#error "RIGFIX_CLI_PATH must name the rigfix executable"
#endif

namespace rigfix {
namespace {

namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

struct Outcome {
  bool pass = false;
  std::string detail;
};

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string format(const char* fmt, auto... args) {
  char buf[256];
  std::snprintf(buf, sizeof buf, fmt, args...);
  return buf;
}

double max_abs(const Rotation3& w) {
  return std::max({std::abs(w.omega_x), std::abs(w.omega_y), std::abs(w.omega_z)});
}

// Uniform per-axis angles in [-bound, bound] degrees, drawn x, y, z in order.
Rotation3 draw_degrees(Xorshift64Star& rng, double bound) {
  const double x = rng.uniform(-bound, bound);
  const double y = rng.uniform(-bound, bound);
  const double z = rng.uniform(-bound, bound);
  return Rotation3::from_degrees(x, y, z);
}

/// Truth with the right camera's pan and roll at zero, so the four-parameter
/// model describes the data exactly.
RigTruth four_param_truth(const Rotation3& d_omega, double d_f) {
  RigTruth t;
  t.omega1 = {d_omega.omega_x / 2.0, 0.0, 0.0};
  t.omega0 = t.omega1 - d_omega;
  t.d_f = d_f;
  return t;
}

Outcome exact_recovery() {
  const auto t0 = Clock::now();
  double worst = 0.0;
  for (int s = 1; s <= 100; ++s) {
    Xorshift64Star rng(static_cast<std::uint64_t>(s));
    // Per-axis bound 0.57 deg keeps the norm under 1 deg.
    const Rotation3 dw = draw_degrees(rng, 0.57);
    const double df = rng.uniform(-0.01, 0.01);
    SimConfig cfg;
    cfg.point_count = 200;
    cfg.noise_sigma_px = 0.0;
    cfg.seed = static_cast<std::uint64_t>(s);
    cfg.truth = four_param_truth(dw, df);
    const auto r = render_matches(generate_scene(cfg), Generation::Linearized);
    const auto sol = robust_solve(r.matches, {});
    worst = std::max({worst, max_abs(sol.d_omega - dw), std::abs(sol.d_f - df)});
  }
  const double elapsed = seconds_since(t0);
  return {worst <= 1e-9 && elapsed < 1.0, format("max error %.3g, %.3f s", worst, elapsed)};
}

double recovery_error(ModelKind model, double scale_deg) {
  const double s = scale_deg;
  const Rotation3 dw = Rotation3::from_degrees(0.6 * s, -0.8 * s, s);
  RigTruth t;
  if (model == ModelKind::FourParam) {
    t = four_param_truth(dw, 0.01 * s);
  } else {
    t.omega1 = Rotation3::from_degrees(0.3 * s, 0.5 * s, -0.4 * s);
    t.omega0 = t.omega1 - dw;
    t.d_f = 0.01 * s;
  }
  SimConfig cfg;
  cfg.noise_sigma_px = 0.0;
  cfg.seed = 42;
  cfg.d_max = 0.2;
  cfg.truth = t;
  const auto r = render_matches(generate_scene(cfg), Generation::Exact);
  SolverConfig sc;
  sc.model = model;
  const auto p = robust_solve(r.matches, sc).parameters();
  const double truth[6] = {dw.omega_x, dw.omega_y, dw.omega_z, t.omega1.omega_y, t.omega1.omega_z, t.d_f};
  double e = 0.0;
  for (int c : model_columns(model)) e = std::max(e, std::abs(p[c] - truth[c]));
  return e;
}

Outcome linearization_order() {
  bool pass = true;
  std::string detail;
  for (ModelKind m : {ModelKind::FourParam, ModelKind::SixParam}) {
    const double e1 = recovery_error(m, 1.0);
    const double e2 = recovery_error(m, 0.5);
    const double e4 = recovery_error(m, 0.25);
    pass = pass && e1 / e2 >= 3.5 && e2 / e4 >= 3.5;
    detail += format("%s ratios %.2f %.2f; ", std::string(to_string(m)).c_str(), e1 / e2, e2 / e4);
  }
  return {pass, detail};
}

Outcome robustness() {
  int ok = 0;
  double worst_angle = 0.0;
  double worst_df = 0.0;
  for (int s = 1; s <= 100; ++s) {
    Xorshift64Star rng(1000 + static_cast<std::uint64_t>(s));
    const Rotation3 dw = draw_degrees(rng, 1.0);
    const double df = rng.uniform(-0.01, 0.01);
    SimConfig cfg;
    cfg.point_count = 500;
    cfg.noise_sigma_px = 0.2;
    cfg.outlier_rate = 0.3;
    cfg.seed = static_cast<std::uint64_t>(s);
    cfg.truth = four_param_truth(dw, df);
    const auto r = render_matches(generate_scene(cfg), Generation::Linearized);
    try {
      const auto sol = robust_solve(r.matches, {});
      const double ea = rad_to_deg(max_abs(sol.d_omega - dw));
      const double ef = std::abs(sol.d_f - df);
      worst_angle = std::max(worst_angle, ea);
      worst_df = std::max(worst_df, ef);
      if (ea <= 0.05 && ef <= 5e-4) ++ok;
    } catch (const Error&) {
    }
  }
  return {ok >= 95, format("%d/100 within tolerance, worst %.4f deg, df %.2g", ok, worst_angle, worst_df)};
}

Outcome misaligned_pair() {
  // Mixed scene: near structure plus a far subset that pins dx at infinity.
  SimConfig cfg;
  cfg.point_count = 400;
  cfg.noise_sigma_px = 0.2;
  cfg.seed = 7;
  cfg.truth = RigTruth::from_relative(Rotation3::from_degrees(0.0, 0.5, 1.0), 0.005);
  MatchSet set = render_matches(generate_scene(cfg), Generation::Exact).matches;
  cfg.point_count = 100;
  cfg.d_max = 0.0;
  cfg.seed = 1007;
  const MatchSet far = render_matches(generate_scene(cfg), Generation::Exact).matches;
  set.matches.insert(set.matches.end(), far.matches.begin(), far.matches.end());
  const auto sol = robust_solve(set, {});
  const double f = set.k0.f;
  const auto before = stats(set, f);
  const auto after = stats(apply_to_matches(set, sol), f);
  return {after.fraction_dy_below_1px >= 0.9 && std::abs(after.dx_at_infinity_px) <= 0.5,
          format("|dy|<1 fraction %.3f -> %.3f, far dx %.3f px", before.fraction_dy_below_1px,
                 after.fraction_dy_below_1px, after.dx_at_infinity_px)};
}

Outcome drift_models() {
  struct Tally {
    int success = 0;
    std::vector<double> rates;
  } three, four;
  double df_err = 0.0;
  double df_true = 0.0;
  for (int s = 1; s <= 50; ++s) {
    SimConfig cfg;
    cfg.point_count = 300;
    cfg.noise_sigma_px = 0.3;
    cfg.outlier_rate = 0.2;
    cfg.df_max = 0.01;
    cfg.seed = 500 + static_cast<std::uint64_t>(s);
    const SceneTruth scene = generate_scene(cfg);
    const auto r = render_matches(scene, Generation::Exact);
    for (ModelKind m : {ModelKind::ThreeParam, ModelKind::FourParam}) {
      Tally& t = m == ModelKind::ThreeParam ? three : four;
      SolverConfig sc;
      sc.model = m;
      try {
        const auto sol = robust_solve(r.matches, sc);
        t.success += evaluate(sol).stereo() ? 1 : 0;
        t.rates.push_back(testing::fraction(sol.abs_residuals_px, [](double a) { return a <= 1.0; }));
        if (m == ModelKind::FourParam) {
          df_err += std::abs(sol.d_f - scene.true_df);
          df_true += std::abs(scene.true_df);
        }
      } catch (const Error&) {
        t.rates.push_back(0.0);
        if (m == ModelKind::FourParam) df_true += std::abs(scene.true_df);
      }
    }
  }
  auto median = [](std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
  };
  const double m3 = median(three.rates);
  const double m4 = median(four.rates);
  const double rel = df_err / df_true;
  return {four.success >= three.success && m4 >= m3 && rel <= 0.1,
          format("success %d vs %d of 50, median inlier rate %.3f vs %.3f, df error %.1f%% of drift",
                 three.success, four.success, m3, m4, 100.0 * rel)};
}

Outcome gate_boundaries() {
  auto base = [](std::size_t n, double rate) {
    RectificationSolution s;
    s.match_count = n;
    s.inlier_count = static_cast<std::size_t>(std::lround(rate * static_cast<double>(n)));
    s.inlier_rate = rate;
    return s;
  };
  auto with_angles = [&](const Rotation3& dw) {
    auto s = base(150, 0.85);
    s.d_omega = dw;
    std::tie(s.omega0, s.omega1) = split_corrections(dw, std::nullopt, std::nullopt);
    return s;
  };
  struct Pair {
    const char* name;
    RectificationSolution accept;
    RectificationSolution reject;
    GateReason reason;
  };
  const Pair pairs[] = {
      {"matches", base(100, 1.0), base(99, 1.0), GateReason::TooFewMatches},
      {"inliers", base(1000, 0.600), base(1000, 0.599), GateReason::LowInlierRate},
      // The even split puts half the relative pitch on each camera.
      {"pitch", with_angles(Rotation3::from_degrees(2 * 4.99, 0, 0)),
       with_angles(Rotation3::from_degrees(2 * 5.01, 0, 0)), GateReason::PitchOutOfBounds},
      {"pan", with_angles(Rotation3::from_degrees(0, 21.9, 0)),
       with_angles(Rotation3::from_degrees(0, 22.1, 0)), GateReason::RelPanOutOfBounds},
  };
  bool pass = true;
  std::string detail;
  for (const Pair& p : pairs) {
    const auto a = evaluate(p.accept);
    const auto r = evaluate(p.reject);
    const bool flips = a.stereo() && !r.stereo() && r.reasons == std::vector<GateReason>{p.reason};
    pass = pass && flips;
    detail += format("%s %s; ", p.name, flips ? "flips" : "does not flip");
  }
  return {pass, detail};
}

Outcome matcher_accuracy() {
  const Intrinsics k{250.0, 159.5, 119.5};
  // Integer shifts, and half-integer shifts along one axis at a time.
  const double shifts[][2] = {{0, 0},   {3, 0},   {7, 1},   {12, -2}, {2.5, 0},
                              {5.5, 0}, {9.5, -1}, {4, 0.5}, {6, -1.5}};
  // Half-integer on both axes: reported only, independent 1D fits are weak here.
  const double diagonal[][2] = {{5.5, 0.5}, {9.5, -1.5}};
  const GrayImage left = testing::shifted_texture(320, 240, 0, 0);
  const auto corners = harris_corners(left);
  auto accuracy = [&](std::span<const double[2]> set_of_shifts) {
    std::size_t total = 0;
    std::size_t close = 0;
    for (const auto& s : set_of_shifts) {
      const GrayImage right = testing::shifted_texture(320, 240, s[0], s[1]);
      for (const Match& m : match_hierarchical(left, right, corners, {}, k, k).matches) {
        ++total;
        if (std::hypot(m.right.u - m.left.u - s[0], m.right.v - m.left.v - s[1]) <= 0.25) ++close;
      }
    }
    return std::pair{total, total ? static_cast<double>(close) / static_cast<double>(total) : 0.0};
  };
  const auto [total, frac] = accuracy(shifts);
  const double diag_frac = accuracy(diagonal).second;

  // Decoys: a right-image band overwritten with content from 50 rows lower,
  // outside the vertical search range. Every forward match starting in the
  // band is ambiguous; the LR filter should reject them.
  GrayImage right = testing::shifted_texture(320, 240, 4, 0);
  const int u_lo = 120;
  const int u_hi = 170;
  for (int v = 0; v < 180; ++v)
    for (int u = u_lo; u < u_hi; ++u) right(u, v) = right(u, v + 50);
  std::vector<Pixel> starts;
  for (const Corner& c : corners) starts.push_back({static_cast<int>(std::lround(c.u)), static_cast<int>(std::lround(c.v))});
  const MatcherConfig mc;
  const auto forward = match_one_way(left, right, starts, mc, k, k);
  const auto kept = match_hierarchical(left, right, corners, mc, k, k);
  // A left point maps to u + 4; keep a patch-radius margin inside the band.
  auto in_band = [&](const Match& m) {
    const double ur = m.left.u + 4.0;
    return ur >= u_lo + mc.patch_radius && ur < u_hi - mc.patch_radius && m.left.v < 180 - mc.patch_radius;
  };
  std::size_t decoys = 0;
  std::size_t survivors = 0;
  for (const Match& m : forward.matches) decoys += in_band(m) ? 1 : 0;
  for (const Match& m : kept.matches) survivors += in_band(m) ? 1 : 0;
  const double removed = decoys ? 1.0 - static_cast<double>(survivors) / static_cast<double>(decoys) : 0.0;
  return {frac >= 0.95 && decoys > 0 && removed >= 0.9,
          format("%.1f%% of %zu matches within 0.25 px; %zu/%zu decoys removed; "
                 "diagonal half-pixel %.1f%% (info)",
                 100.0 * frac, total, decoys - survivors, decoys, 100.0 * diag_frac)};
}

Outcome gauge_invariance() {
  SimConfig cfg;
  cfg.point_count = 300;
  cfg.noise_sigma_px = 0.0;
  cfg.seed = 21;
  const RigTruth t = RigTruth::from_relative(Rotation3::from_degrees(0.3, -0.4, 0.7), 0.004);
  cfg.truth = t;
  const SceneTruth scene = generate_scene(cfg);
  const std::vector<double> theta{t.d_omega().omega_x, t.d_omega().omega_y, t.d_omega().omega_z,
                                  t.omega1.omega_y,    t.omega1.omega_z,    t.d_f};
  const auto base = residuals(render_matches(scene, Generation::Linearized).matches, theta, ModelKind::SixParam);
  double worst = 0.0;
  for (double delta_deg : {0.1, 1.0}) {
    SceneTruth shifted = scene;
    const Rotation3 pitch = Rotation3::from_degrees(delta_deg, 0, 0);
    shifted.true_omega0 = scene.true_omega0 + pitch;
    shifted.true_omega1 = scene.true_omega1 + pitch;
    const auto r = residuals(render_matches(shifted, Generation::Linearized).matches, theta, ModelKind::SixParam);
    if (r.size() != base.size()) return {false, "point count changed"};
    for (std::size_t i = 0; i < r.size(); ++i) worst = std::max(worst, std::abs(r[i] - base[i]));
  }
  return {worst <= 1e-12, format("max residual change %.3g", worst)};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

int shell(const std::string& cmd) { return std::system((cmd + " > /dev/null 2>&1").c_str()); }

Outcome cli_determinism() {
  const fs::path root = fs::temp_directory_path() / "rigfix_acceptance_determinism";
  fs::remove_all(root);
  const std::string exe = RIGFIX_CLI_PATH;
  for (const char* run : {"a", "b"}) {
    const fs::path d = root / run;
    const std::string q = "'" + d.string() + "'";
    if (shell("'" + exe + "' simulate --images --seed 1234 --out-dir " + q + "/sim") != 0 ||
        shell("'" + exe + "' match " + q + "/sim/left.png " + q + "/sim/right.png -o " + q + "/matches.csv") != 0 ||
        shell("'" + exe + "' solve " + q + "/matches.csv -o " + q + "/report.json") != 0 ||
        shell("'" + exe + "' rectify " + q + "/sim/left.png " + q + "/sim/right.png " + q +
              "/report.json --matches " + q + "/matches.csv --out-dir " + q + "/rect") != 0) {
      return {false, std::string("pipeline failed in run ") + run};
    }
  }
  std::size_t compared = 0;
  std::string mismatch;
  for (const auto& e : fs::recursive_directory_iterator(root / "a")) {
    if (!e.is_regular_file()) continue;
    const auto rel = fs::relative(e.path(), root / "a");
    ++compared;
    if (slurp(e.path()) != slurp(root / "b" / rel)) mismatch += rel.string() + " ";
  }
  fs::remove_all(root);
  return {compared >= 8 && mismatch.empty(),
          mismatch.empty() ? format("%zu files identical", compared) : "differs: " + mismatch};
}

Outcome desk_runtime() {
  SimConfig cfg;
  cfg.seed = 5;
  cfg.truth = RigTruth::from_relative(Rotation3::from_degrees(0.2, 0.5, 1.0), 0.005);
  const TexturePair pair = render_texture_pair(cfg, 0.02);
  const auto t0 = Clock::now();
  // NMS radius 4 so the texture yields the full 2000-corner budget.
  HarrisConfig hc;
  hc.nms_radius = 4;
  const auto corners = harris_corners(pair.left, hc);
  const auto set = match_hierarchical(pair.left, pair.right, corners, {}, cfg.k0, cfg.k1);
  const auto sol = robust_solve(set, {});
  const auto [m0, m1] = build_maps(cfg.k0, cfg.k1, sol);
  const auto w0 = warp(pair.left, m0);
  const auto w1 = warp(pair.right, m1);
  const double elapsed = seconds_since(t0);
  return {corners.size() == 2000 && elapsed < 2.0 && w0.image.width() == 640 && w1.image.height() == 480,
          format("%zu corners, %zu matches, %.3f s", corners.size(), set.size(), elapsed)};
}

}  // namespace
}  // namespace rigfix

int main() {
  using namespace rigfix;
  const std::pair<const char*, std::function<Outcome()>> criteria[] = {
      {"exact recovery", exact_recovery},
      {"linearization order", linearization_order},
      {"robustness to outliers", robustness},
      {"misaligned pair rectification", misaligned_pair},
      {"focal drift model comparison", drift_models},
      {"gating boundaries", gate_boundaries},
      {"matcher accuracy and LR filter", matcher_accuracy},
      {"pitch gauge invariance", gauge_invariance},
      {"CLI determinism", cli_determinism},
      {"desk-scale runtime", desk_runtime},
  };
  int failed = 0;
  int index = 1;
  for (const auto& [name, fn] : criteria) {
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o = {false, std::string("threw: ") + e.what()};
    }
    failed += o.pass ? 0 : 1;
    std::printf("[%s] %2d %s: %s\n", o.pass ? "PASS" : "FAIL", index++, name, o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(std::size(criteria)) - failed, std::size(criteria));
  return failed == 0 ? 0 : 1;
}
