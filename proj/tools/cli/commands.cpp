#include "commands.hpp"

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <iostream>
#include <memory>

#include "CLI11.hpp"
#include "rigfix/error.hpp"
#include "rigfix/image_io.hpp"
#include "rigfix/rectifier.hpp"
#include "rigfix/serialization.hpp"
#include "svg.hpp"

namespace rigfix::cli {
namespace {

namespace fs = std::filesystem;

constexpr double kDefaultFocalPx = 500.0;

std::pair<Intrinsics, Intrinsics> resolve_intrinsics(const PipelineConfig& cfg, int width,
                                                     int height, double focal = kDefaultFocalPx) {
  const Intrinsics centre{focal, (width - 1) / 2.0, (height - 1) / 2.0};
  const Intrinsics k0 = cfg.k0.value_or(centre);
  return {k0, cfg.k1.value_or(k0)};
}

// Explicit intrinsics win; otherwise they are fitted from the CSV columns.
std::pair<Intrinsics, Intrinsics> csv_intrinsics(const PipelineConfig& cfg, const std::string& csv) {
  Intrinsics k0{kDefaultFocalPx, 0.0, 0.0};
  Intrinsics k1 = k0;
  if (!cfg.k0 && !cfg.k1) {
    infer_intrinsics(csv, k0, k1);
    return {k0, k1};
  }
  k0 = cfg.k0.value_or(*cfg.k1);
  return {k0, cfg.k1.value_or(k0)};
}

struct SolveOutcome {
  std::optional<RectificationSolution> solution;
  GateDecision gate;
  std::string error;
};

SolveOutcome solve_and_gate(const MatchSet& set, const SolverConfig& solver, const GateConfig& gate) {
  SolveOutcome o;
  try {
    o.solution = robust_solve(set, solver);
    o.gate = evaluate(*o.solution, gate);
  } catch (const TooFewMatchesError& e) {
    o.gate = solver_failure_decision(true, set.size(), gate);
    o.error = e.what();
  } catch (const DegenerateGeometryError& e) {
    o.gate = solver_failure_decision(false, set.size(), gate);
    o.error = e.what();
  }
  return o;
}

std::string reasons_text(const GateDecision& d) {
  std::string s;
  for (GateReason r : d.reasons) {
    if (!s.empty()) s += ',';
    s += to_string(r);
  }
  return s;
}

std::string number(double v, const char* pattern = "%.6g") {
  char buf[64];
  std::snprintf(buf, sizeof buf, pattern, v);
  return buf;
}

double median(std::vector<double> v) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

struct Scenario {
  std::string name;
  MatchSet matches;
  std::optional<double> true_df;
};

// Runs the 3-param and 4-param models over every scenario and renders the
// comparison table as CSV.
std::string compare_models(const std::vector<Scenario>& scenarios, const PipelineConfig& cfg) {
  std::string table = "model,scenarios,success_rate,median_inlier_rate,mean_abs_df_error\n";
  for (ModelKind kind : {ModelKind::ThreeParam, ModelKind::FourParam}) {
    SolverConfig solver = cfg.solver;
    solver.model = kind;
    std::size_t successes = 0;
    std::vector<double> rates;
    double df_error = 0.0;
    std::size_t with_truth = 0;
    for (const Scenario& s : scenarios) {
      const SolveOutcome o = solve_and_gate(s.matches, solver, cfg.gate);
      if (o.gate.stereo()) ++successes;
      double rate = 0.0;
      if (o.solution && !o.solution->abs_residuals_px.empty()) {
        const auto& r = o.solution->abs_residuals_px;
        rate = static_cast<double>(std::count_if(r.begin(), r.end(), [&](double x) {
                 return x <= cfg.gate.inlier_dy_px;
               })) /
               static_cast<double>(r.size());
      }
      rates.push_back(rate);
      if (s.true_df) {
        ++with_truth;
        df_error += std::abs((o.solution ? o.solution->d_f : 0.0) - *s.true_df);
      }
    }
    const double n = static_cast<double>(scenarios.size());
    table += std::string(to_string(kind)) + ',' + std::to_string(scenarios.size()) + ',' +
             number(successes / n, "%.4f") + ',' + number(median(rates), "%.4f") + ',' +
             (with_truth ? number(df_error / with_truth, "%.6g") : std::string()) + '\n';
  }
  return table;
}

std::vector<ScatterPoint> scatter_points(const MatchSet& set, double f) {
  std::vector<ScatterPoint> pts;
  pts.reserve(set.size());
  for (const Match& m : set.matches) pts.push_back({m.dx * f, m.dy * f});
  return pts;
}

fs::path with_suffix(const fs::path& dir, const std::string& stem, const fs::path& like) {
  return dir / (stem + like.extension().string());
}

}  // namespace

int cmd_match(const MatchOptions& opt, const PipelineConfig& cfg, std::ostream& out) {
  const LoadedImage left = read_image(opt.left);
  const LoadedImage right = read_image(opt.right);
  if (left.image.width() != right.image.width() || left.image.height() != right.image.height()) {
    throw ConfigError("left and right images differ in size");
  }
  const auto [k0, k1] = resolve_intrinsics(cfg, left.image.width(), left.image.height());
  const auto corners = harris_corners(left.image, cfg.harris);
  MatchSet set = match_hierarchical(left.image, right.image, corners, cfg.matcher, k0, k1);
  write_text_file(opt.output, matches_to_csv(set));
  out << corners.size() << " corners, " << set.size() << " matches -> " << opt.output.string() << '\n';
  return kExitOk;
}

int cmd_solve(const SolveOptions& opt, const PipelineConfig& cfg, std::ostream& out) {
  const std::string csv = read_text_file(opt.matches);
  const auto [k0, k1] = csv_intrinsics(cfg, csv);
  const MatchSet set = matches_from_csv(csv, k0, k1);
  const SolveOutcome o = solve_and_gate(set, cfg.solver, cfg.gate);
  write_text_file(opt.output, report_to_json(o.solution, o.gate, cfg.solver.model, set.size(), o.error));
  out << to_string(cfg.solver.model) << ": " << set.size() << " matches";
  if (o.solution) {
    out << ", " << o.solution->inlier_count << " inliers, d_omega_deg ["
        << number(rad_to_deg(o.solution->d_omega.omega_x)) << ", "
        << number(rad_to_deg(o.solution->d_omega.omega_y)) << ", "
        << number(rad_to_deg(o.solution->d_omega.omega_z)) << "], d_f " << number(o.solution->d_f);
  }
  out << " -> " << to_string(o.gate.outcome);
  if (!o.gate.reasons.empty()) out << " (" << reasons_text(o.gate) << ')';
  out << '\n';
  return o.gate.stereo() ? kExitOk : kExitMonoFallback;
}

int cmd_rectify(const RectifyOptions& opt, const PipelineConfig& cfg, std::ostream& out) {
  const SolverReport report = report_from_json(read_text_file(opt.report));
  if (!report.solution || !report.gate.stereo()) {
    out << "report is " << to_string(report.gate.outcome) << " (" << reasons_text(report.gate)
        << "); not warping\n";
    return kExitMonoFallback;
  }
  const RectificationSolution& sol = *report.solution;
  const LoadedImage left = read_image(opt.left);
  const LoadedImage right = read_image(opt.right);
  const int w = left.image.width();
  const int h = left.image.height();
  if (right.image.width() != w || right.image.height() != h) {
    throw ConfigError("left and right images differ in size");
  }
  const auto [k0, k1] = resolve_intrinsics(cfg, w, h, sol.focal_px);
  const auto [map0, map1] = build_maps(k0, k1, sol);
  const WarpedImage w0 = warp(left.image, map0);
  const WarpedImage w1 = warp(right.image, map1);

  fs::create_directories(opt.out_dir);
  write_image(with_suffix(opt.out_dir, "left_rect", opt.left), w0.image, left.bit_depth);
  write_image(with_suffix(opt.out_dir, "right_rect", opt.right), w1.image, right.bit_depth);
  const Rect crop_rect = common_valid_rect(w0.mask, w1.mask);
  if (crop_rect.width > 0 && crop_rect.height > 0) {
    write_image(with_suffix(opt.out_dir, "left_rect_crop", opt.left), crop(w0.image, crop_rect),
                left.bit_depth);
    write_image(with_suffix(opt.out_dir, "right_rect_crop", opt.right), crop(w1.image, crop_rect),
                right.bit_depth);
  }

  MatchSet before;
  if (opt.matches) {
    before = matches_from_csv(read_text_file(*opt.matches), k0, k1);
  } else {
    const auto corners = harris_corners(left.image, cfg.harris);
    before = match_hierarchical(left.image, right.image, corners, cfg.matcher, k0, k1);
  }
  const MatchSet after = apply_to_matches(before, sol);
  DisparityStats s_before;
  DisparityStats s_after;
  if (!before.empty()) {
    s_before = stats(before, k1.f);
    s_after = stats(after, map0.output.f);
  }
  write_text_file(opt.out_dir / "stats.json", stats_to_json(s_before, s_after));

  const auto pts_before = scatter_points(before, k1.f);
  const auto pts_after = scatter_points(after, map0.output.f);
  std::string csv = "dx_px,dy_px,stage\n";
  for (const auto& [pts, stage] : {std::pair{&pts_before, "before"}, std::pair{&pts_after, "after"}}) {
    for (const ScatterPoint& p : *pts) {
      csv += number(p.dx_px, "%.9g") + ',' + number(p.dy_px, "%.9g") + ',' + stage + '\n';
    }
  }
  write_text_file(opt.out_dir / "scatter.csv", csv);
  write_text_file(opt.out_dir / "scatter.svg", scatter_svg(pts_before, pts_after));

  out << before.size() << " matches; |dy| < 1 px: " << number(s_before.fraction_dy_below_1px, "%.3f")
      << " before, " << number(s_after.fraction_dy_below_1px, "%.3f") << " after; crop " << crop_rect.width
      << 'x' << crop_rect.height << " at (" << crop_rect.u0 << ", " << crop_rect.v0 << ")\n";
  return kExitOk;
}

int cmd_simulate(const SimulateOptions& opt, const SimConfig& sim, const PipelineConfig& cfg,
                 std::ostream& out) {
  sim.validate();
  fs::create_directories(opt.out_dir);
  if (opt.batch > 0) {
    if (opt.fixtures_dir) fs::create_directories(*opt.fixtures_dir);
    std::vector<Scenario> scenarios;
    for (int i = 0; i < opt.batch; ++i) {
      SimConfig c = sim;
      c.seed = sim.seed + static_cast<std::uint64_t>(i);
      const SceneTruth scene = generate_scene(c);
      const RenderedMatches r = render_matches(scene, opt.generation);
      char name[32];
      std::snprintf(name, sizeof name, "scenario_%04d", i);
      if (opt.fixtures_dir) {
        write_text_file(*opt.fixtures_dir / (std::string(name) + ".csv"), matches_to_csv(r.matches));
        write_text_file(*opt.fixtures_dir / (std::string(name) + ".json"), scene_to_json(c, scene, &r));
      }
      scenarios.push_back({name, r.matches, scene.true_df});
    }
    const std::string table = compare_models(scenarios, cfg);
    write_text_file(opt.out_dir / "table.csv", table);
    out << table;
    return kExitOk;
  }

  const SceneTruth scene = generate_scene(sim);
  const RenderedMatches r = render_matches(scene, opt.generation);
  write_text_file(opt.out_dir / "scene.json", scene_to_json(sim, scene, &r));
  write_text_file(opt.out_dir / "matches.csv", matches_to_csv(r.matches));
  out << r.matches.size() << " matches (" << r.skipped << " skipped)";
  if (opt.images) {
    const TexturePair pair = render_texture_pair(sim, opt.plane_disparity);
    write_image(opt.out_dir / "left.png", pair.left);
    write_image(opt.out_dir / "right.png", pair.right);
    out << ", images " << sim.width << 'x' << sim.height;
  }
  out << " -> " << opt.out_dir.string() << '\n';
  return kExitOk;
}

int cmd_compare_models(const CompareOptions& opt, const PipelineConfig& cfg, std::ostream& out) {
  if (!fs::is_directory(opt.fixtures)) throw IoError("not a directory: " + opt.fixtures.string());
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(opt.fixtures)) {
    if (entry.is_regular_file() && entry.path().extension() == ".csv") files.push_back(entry.path());
  }
  if (files.empty()) throw ConfigError("no match fixtures (*.csv) in " + opt.fixtures.string());
  std::sort(files.begin(), files.end());

  std::vector<Scenario> scenarios;
  for (const fs::path& csv_path : files) {
    const std::string csv = read_text_file(csv_path);
    auto [k0, k1] = csv_intrinsics(cfg, csv);
    std::optional<double> true_df;
    fs::path truth_path = csv_path;
    truth_path.replace_extension(".json");
    if (fs::exists(truth_path)) {
      const SceneTruth truth = scene_truth_from_json(read_text_file(truth_path));
      true_df = truth.true_df;
      if (!cfg.k0 && !cfg.k1) {
        k0 = truth.k0;
        k1 = truth.k1;
      }
    }
    scenarios.push_back({csv_path.stem().string(), matches_from_csv(csv, k0, k1), true_df});
  }
  const std::string table = compare_models(scenarios, cfg);
  write_text_file(opt.output, table);
  out << table;
  return kExitOk;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Online stereo self-rectification"};
  app.name("rigfix");
  app.require_subcommand(1);

  std::optional<fs::path> config_path;
  std::optional<std::string> k0_text;
  std::optional<std::string> k1_text;
  const auto add_pipeline_flags = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "Pipeline configuration (JSON)");
    sub->add_option("--k0", k0_text, "Left intrinsics f,cx,cy in pixels");
    sub->add_option("--k1", k1_text, "Right intrinsics f,cx,cy in pixels");
  };
  std::optional<std::string> model_text;
  std::optional<int> max_corners;

  MatchOptions match_opt;
  CLI::App* match = app.add_subcommand("match", "Detect and match features in a stereo pair");
  match->add_option("left", match_opt.left, "Left image (PGM or PNG)")->required();
  match->add_option("right", match_opt.right, "Right image (PGM or PNG)")->required();
  match->add_option("-o,--output", match_opt.output, "Match CSV to write");
  match->add_option("--max-corners", max_corners, "Harris corner budget");
  add_pipeline_flags(match);

  SolveOptions solve_opt;
  CLI::App* solve = app.add_subcommand("solve", "Estimate rectification from a match CSV and gate it");
  solve->add_option("matches", solve_opt.matches, "Match CSV")->required();
  solve->add_option("-o,--output", solve_opt.output, "Report JSON to write");
  solve->add_option("--model", model_text, "3-param, 4-param, 5-param or 6-param");
  add_pipeline_flags(solve);

  RectifyOptions rect_opt;
  std::optional<fs::path> rect_matches;
  CLI::App* rectify = app.add_subcommand("rectify", "Warp a stereo pair with a solver report");
  rectify->add_option("left", rect_opt.left, "Left image")->required();
  rectify->add_option("right", rect_opt.right, "Right image")->required();
  rectify->add_option("report", rect_opt.report, "Report JSON from solve")->required();
  rectify->add_option("--matches", rect_matches, "Match CSV for the statistics (default: re-match)");
  rectify->add_option("--out-dir", rect_opt.out_dir, "Output directory");
  rectify->add_option("--max-corners", max_corners, "Harris corner budget when re-matching");
  add_pipeline_flags(rectify);

  SimulateOptions sim_opt;
  std::optional<fs::path> sim_config_path;
  std::optional<fs::path> sim_pipeline_path;
  std::optional<std::uint64_t> sim_seed;
  std::optional<int> sim_points;
  std::optional<double> sim_noise;
  std::optional<double> sim_outliers;
  std::string generation = "exact";
  std::optional<fs::path> fixtures_dir;
  CLI::App* simulate = app.add_subcommand("simulate", "Generate a synthetic scenario or a batch table");
  simulate->add_option("--config", sim_config_path, "Simulation configuration (JSON)");
  simulate->add_option("--pipeline", sim_pipeline_path, "Pipeline configuration for batch solves");
  simulate->add_option("--out-dir", sim_opt.out_dir, "Output directory");
  simulate->add_option("--generation", generation, "exact or linearized")
      ->check(CLI::IsMember({"exact", "linearized"}));
  simulate->add_flag("--images", sim_opt.images, "Also render a textured image pair");
  simulate->add_option("--plane-disparity", sim_opt.plane_disparity,
                       "Inverse depth of the textured plane");
  simulate->add_option("--batch", sim_opt.batch, "Number of scenarios for a model comparison table");
  simulate->add_option("--fixtures-dir", fixtures_dir, "Write each batch scenario as CSV + JSON");
  simulate->add_option("--seed", sim_seed, "Random seed");
  simulate->add_option("--points", sim_points, "Point count");
  simulate->add_option("--noise", sim_noise, "Pixel noise sigma");
  simulate->add_option("--outlier-rate", sim_outliers, "Gross outlier fraction");

  CompareOptions cmp_opt;
  CLI::App* compare = app.add_subcommand("compare-models", "Compare 3-param and 4-param over fixtures");
  compare->add_option("fixtures", cmp_opt.fixtures, "Directory of match CSV fixtures")->required();
  compare->add_option("-o,--output", cmp_opt.output, "Table CSV to write");
  add_pipeline_flags(compare);

  std::vector<std::string> argv_store;
  argv_store.reserve(args.size() + 1);
  argv_store.push_back("rigfix");
  argv_store.insert(argv_store.end(), args.begin(), args.end());
  std::vector<char*> argv;
  for (std::string& a : argv_store) argv.push_back(a.data());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    PipelineConfig cfg;
    if (config_path) cfg = load_pipeline_config(*config_path);
    if (sim_pipeline_path) cfg = load_pipeline_config(*sim_pipeline_path);
    if (k0_text) cfg.k0 = parse_intrinsics(*k0_text);
    if (k1_text) cfg.k1 = parse_intrinsics(*k1_text);
    if (model_text) cfg.solver.model = model_kind_from_string(*model_text);
    if (max_corners) cfg.harris.max_corners = *max_corners;
    cfg.validate();

    if (match->parsed()) return cmd_match(match_opt, cfg, out);
    if (solve->parsed()) return cmd_solve(solve_opt, cfg, out);
    if (rectify->parsed()) {
      rect_opt.matches = rect_matches;
      return cmd_rectify(rect_opt, cfg, out);
    }
    if (simulate->parsed()) {
      SimConfig sim = sim_config_path ? sim_config_from_json(read_text_file(*sim_config_path)) : SimConfig{};
      if (const char* env = std::getenv("RIGFIX_SEED"); env && *env) {
        char* end = nullptr;
        const unsigned long long v = std::strtoull(env, &end, 10);
        if (*end != '\0') throw ConfigError("RIGFIX_SEED must be an unsigned integer");
        sim.seed = v;
      }
      if (sim_seed) sim.seed = *sim_seed;
      if (sim_points) sim.point_count = *sim_points;
      if (sim_noise) sim.noise_sigma_px = *sim_noise;
      if (sim_outliers) sim.outlier_rate = *sim_outliers;
      sim_opt.generation = generation == "linearized" ? Generation::Linearized : Generation::Exact;
      sim_opt.fixtures_dir = fixtures_dir;
      if (sim_opt.batch < 0) throw ConfigError("--batch must be non-negative");
      return cmd_simulate(sim_opt, sim, cfg, out);
    }
    if (compare->parsed()) return cmd_compare_models(cmp_opt, cfg, out);
  } catch (const IoError& e) {
    err << "I/O error: " << e.what() << '\n';
    return kExitIo;
  } catch (const ConfigError& e) {
    err << "configuration error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const InvalidIntrinsicsError& e) {
    err << "configuration error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const fs::filesystem_error& e) {
    err << "I/O error: " << e.what() << '\n';
    return kExitIo;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitFailure;
  }
  return kExitFailure;
}

}  // namespace rigfix::cli
