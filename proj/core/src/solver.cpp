#include "rigfix/solver.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <tuple>
#include <string>

#include <Eigen/Dense>

#include "rigfix/error.hpp"

namespace rigfix {
namespace {

constexpr std::array<int, 3> kThreeCols{kColDwx, kColDwy, kColDwz};
constexpr std::array<int, 4> kFourCols{kColDwx, kColDwy, kColDwz, kColDf};
constexpr std::array<int, 5> kFiveCols{kColDwx, kColDwy, kColDwz, kColWy1, kColDf};
constexpr std::array<int, 6> kSixCols{kColDwx, kColDwy, kColDwz, kColWy1, kColWz1, kColDf};

constexpr std::array<std::string_view, 6> kColumnNames{"d_omega_x", "d_omega_y", "d_omega_z",
                                                        "omega_y1",  "omega_z1",  "d_f"};

std::array<double, 6> full_coefficients(const Match& m) {
  const double x0 = m.n0.x;
  const double y0 = m.n0.y;
  const double y1 = m.n1.y;
  return {1.0 + y0 * y1, -x0 * y1, -x0, -m.dx * y1, -m.dx, y0};
}

double dot_model(const std::array<double, 6>& coeffs, std::span<const int> cols,
                 std::span<const double> theta) {
  double s = 0.0;
  for (std::size_t i = 0; i < cols.size(); ++i) s += coeffs[cols[i]] * theta[i];
  return s;
}

std::size_t min_rows(ModelKind kind, const SolverConfig& cfg) {
  return parameter_count(kind) * static_cast<std::size_t>(std::max(cfg.min_matches_factor, 1));
}

struct StageResult {
  std::vector<double> theta;
  std::vector<std::size_t> inliers;
  std::vector<double> residuals;
  std::size_t iterations = 0;
};

StageResult run_stage(const MatchSet& matches, const std::vector<std::array<double, 6>>& coeffs,
                      ModelKind kind, std::vector<std::size_t> inliers, const SolverConfig& cfg,
                      std::vector<double>& thresholds_used) {
  const auto cols = model_columns(kind);
  std::vector<std::string_view> names;
  for (int c : cols) names.push_back(kColumnNames[c]);

  const double f = matches.k1.f;
  const std::size_t schedule = cfg.thresholds_px.size();
  const std::size_t limit = cfg.max_iterations > 0
                                ? std::min(schedule, static_cast<std::size_t>(cfg.max_iterations))
                                : schedule;
  StageResult out;
  for (std::size_t it = 0; it < limit; ++it) {
    if (inliers.size() < min_rows(kind, cfg)) {
      throw TooFewMatchesError("only " + std::to_string(inliers.size()) + " inliers remain for the " +
                               std::string(to_string(kind)) + " model (need " +
                               std::to_string(min_rows(kind, cfg)) + ")");
    }
    std::vector<ConstraintRow> rows;
    rows.reserve(inliers.size());
    for (std::size_t i : inliers) {
      ConstraintRow row;
      row.coefficients.reserve(cols.size());
      for (int c : cols) row.coefficients.push_back(coeffs[i][c]);
      row.rhs = matches.matches[i].dy;
      row.source = i;
      rows.push_back(std::move(row));
    }
    out.theta = lsq_solve(rows, names);

    const double threshold = cfg.thresholds_px[it] / f;
    thresholds_used.push_back(cfg.thresholds_px[it]);
    out.residuals.assign(matches.size(), 0.0);
    inliers.clear();
    for (std::size_t i = 0; i < matches.size(); ++i) {
      out.residuals[i] = dot_model(coeffs[i], cols, out.theta) - matches.matches[i].dy;
      if (std::abs(out.residuals[i]) <= threshold) inliers.push_back(i);
    }
    ++out.iterations;
  }
  out.inliers = std::move(inliers);
  return out;
}

}  // namespace

std::string_view to_string(ModelKind kind) {
  switch (kind) {
    case ModelKind::ThreeParam: return "3-param";
    case ModelKind::FourParam: return "4-param";
    case ModelKind::FiveParam: return "5-param";
    case ModelKind::SixParam: return "6-param";
  }
  return "unknown";
}

ModelKind model_kind_from_string(std::string_view name) {
  if (name == "3-param" || name == "3") return ModelKind::ThreeParam;
  if (name == "4-param" || name == "4") return ModelKind::FourParam;
  if (name == "5-param" || name == "5") return ModelKind::FiveParam;
  if (name == "6-param" || name == "6") return ModelKind::SixParam;
  throw ConfigError("unknown model kind '" + std::string(name) + "'");
}

std::span<const int> model_columns(ModelKind kind) {
  switch (kind) {
    case ModelKind::ThreeParam: return kThreeCols;
    case ModelKind::FourParam: return kFourCols;
    case ModelKind::FiveParam: return kFiveCols;
    case ModelKind::SixParam: return kSixCols;
  }
  return kFourCols;
}

std::size_t parameter_count(ModelKind kind) { return model_columns(kind).size(); }

std::string_view column_name(int column) {
  return column >= 0 && column < 6 ? kColumnNames[static_cast<std::size_t>(column)] : "?";
}

ConstraintRow row_full(const Match& m, std::size_t source) {
  const auto c = full_coefficients(m);
  return {{c.begin(), c.end()}, m.dy, source};
}

ConstraintRow row_reduced(const Match& m, std::size_t source) {
  return row_for_model(m, ModelKind::FourParam, source);
}

ConstraintRow row_for_model(const Match& m, ModelKind kind, std::size_t source) {
  const auto c = full_coefficients(m);
  ConstraintRow row;
  for (int col : model_columns(kind)) row.coefficients.push_back(c[col]);
  row.rhs = m.dy;
  row.source = source;
  return row;
}

ConstraintRow row_horizontal(const Match& m, std::size_t source) {
  const double x0 = m.n0.x;
  const double y0 = m.n0.y;
  const double x1 = m.n1.x;
  return {{-y0 * x1, 1.0 + x0 * x1, -y0, m.dx * x1, 0.0, -x1}, 0.0, source};
}

std::vector<double> lsq_solve(std::span<const ConstraintRow> rows,
                              std::span<const std::string_view> names) {
  if (rows.empty()) throw TooFewMatchesError("no constraint rows");
  const auto p = static_cast<Eigen::Index>(rows.front().coefficients.size());
  const auto n = static_cast<Eigen::Index>(rows.size());
  if (n < p) {
    throw TooFewMatchesError(std::to_string(n) + " rows cannot determine " + std::to_string(p) +
                             " parameters");
  }
  Eigen::MatrixXd a(n, p);
  Eigen::VectorXd b(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& row = rows[static_cast<std::size_t>(i)];
    if (static_cast<Eigen::Index>(row.coefficients.size()) != p) {
      throw ConfigError("constraint rows have inconsistent lengths");
    }
    for (Eigen::Index j = 0; j < p; ++j) a(i, j) = row.coefficients[static_cast<std::size_t>(j)];
    b(i) = row.rhs;
  }
  if (!a.allFinite() || !b.allFinite()) throw ConfigError("constraint rows are not finite");

  const Eigen::JacobiSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Eigen::VectorXd& sv = svd.singularValues();
  const double smax = sv(0);
  const double smin = sv(p - 1);
  if (!(smax > 0.0) || smin <= 1e-10 * smax) {
    Eigen::Index worst = 0;
    svd.matrixV().col(p - 1).cwiseAbs().maxCoeff(&worst);
    const auto idx = static_cast<std::size_t>(worst);
    const std::string name =
        idx < names.size() ? std::string(names[idx]) : "parameter " + std::to_string(idx);
    throw DegenerateGeometryError("rank-deficient constraint system; '" + name +
                                      "' is not identifiable from these matches",
                                  name);
  }
  const Eigen::VectorXd theta = svd.solve(b);
  return {theta.data(), theta.data() + theta.size()};
}

void SolverConfig::validate() const {
  if (thresholds_px.empty()) throw ConfigError("threshold schedule is empty");
  for (std::size_t i = 0; i < thresholds_px.size(); ++i) {
    if (!(thresholds_px[i] > 0.0) || !std::isfinite(thresholds_px[i])) {
      throw ConfigError("inlier thresholds must be positive");
    }
    if (i > 0 && !(thresholds_px[i] < thresholds_px[i - 1])) {
      throw ConfigError("inlier thresholds must be strictly decreasing");
    }
  }
  if (min_matches_factor < 1) throw ConfigError("min_matches_factor must be at least 1");
  if (max_iterations < 0) throw ConfigError("max_iterations must be non-negative");
  if (!(min_dx_spread_px >= 0.0)) throw ConfigError("min_dx_spread_px must be non-negative");
}

std::vector<double> RectificationSolution::parameters() const {
  return {d_omega.omega_x, d_omega.omega_y, d_omega.omega_z,
          omega_y1.value_or(0.0), omega_z1.value_or(0.0), d_f};
}

std::vector<double> residuals(const MatchSet& matches, std::span<const double> theta,
                              ModelKind kind) {
  const auto cols = model_columns(kind);
  if (theta.size() != cols.size()) {
    throw ConfigError("parameter vector length does not match the model");
  }
  std::vector<double> out;
  out.reserve(matches.size());
  for (const Match& m : matches.matches) {
    out.push_back(dot_model(full_coefficients(m), cols, theta) - m.dy);
  }
  return out;
}

std::vector<double> horizontal_residuals(const MatchSet& matches,
                                         std::span<const double> theta6) {
  if (theta6.size() != 6) throw ConfigError("horizontal residuals need six parameters");
  std::vector<double> out;
  out.reserve(matches.size());
  for (const Match& m : matches.matches) {
    const auto row = row_horizontal(m);
    double s = 0.0;
    for (std::size_t j = 0; j < 6; ++j) s += row.coefficients[j] * theta6[j];
    out.push_back(s - row.rhs);
  }
  return out;
}

std::pair<Rotation3, Rotation3> split_corrections(const Rotation3& d_omega,
                                                  std::optional<double> omega_y1,
                                                  std::optional<double> omega_z1) {
  Rotation3 w1{0.5 * d_omega.omega_x, omega_y1.value_or(0.5 * d_omega.omega_y),
               omega_z1.value_or(0.5 * d_omega.omega_z)};
  Rotation3 w0{-0.5 * d_omega.omega_x, w1.omega_y - d_omega.omega_y,
               w1.omega_z - d_omega.omega_z};
  if (!omega_y1) w0.omega_y = -0.5 * d_omega.omega_y;
  if (!omega_z1) w0.omega_z = -0.5 * d_omega.omega_z;
  return {w0, w1};
}

RectificationSolution robust_solve(const MatchSet& matches, const SolverConfig& cfg) {
  cfg.validate();
  matches.k1.validate();
  const ModelKind stage_one =
      cfg.model == ModelKind::ThreeParam ? ModelKind::ThreeParam : ModelKind::FourParam;
  const std::size_t needed = std::max(min_rows(stage_one, cfg), min_rows(cfg.model, cfg));
  if (matches.size() < needed) {
    throw TooFewMatchesError(std::to_string(matches.size()) + " matches; the " +
                             std::string(to_string(cfg.model)) + " model needs at least " +
                             std::to_string(needed));
  }

  std::vector<std::array<double, 6>> coeffs;
  coeffs.reserve(matches.size());
  for (const Match& m : matches.matches) coeffs.push_back(full_coefficients(m));

  std::vector<std::size_t> all(matches.size());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;

  RectificationSolution sol;
  sol.model = cfg.model;
  sol.focal_px = matches.k1.f;

  StageResult stage = run_stage(matches, coeffs, stage_one, all, cfg, sol.thresholds_used_px);
  std::size_t iterations = stage.iterations;

  if (cfg.model == ModelKind::FiveParam || cfg.model == ModelKind::SixParam) {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (std::size_t i : stage.inliers) {
      lo = std::min(lo, matches.matches[i].dx);
      hi = std::max(hi, matches.matches[i].dx);
    }
    const double spread_px = stage.inliers.empty() ? 0.0 : (hi - lo) * matches.k1.f;
    if (!(spread_px >= cfg.min_dx_spread_px)) {
      throw DegenerateGeometryError(
          "insufficient depth range for absolute pan/roll: inlier dx spread " +
              std::to_string(spread_px) + " px < " + std::to_string(cfg.min_dx_spread_px) + " px",
          cfg.model == ModelKind::SixParam ? "omega_z1" : "omega_y1");
    }
    stage = run_stage(matches, coeffs, cfg.model, stage.inliers, cfg, sol.thresholds_used_px);
    iterations += stage.iterations;
  }

  const auto cols = model_columns(cfg.model);
  std::array<double, 6> full{};
  for (std::size_t i = 0; i < cols.size(); ++i) full[cols[i]] = stage.theta[i];
  sol.d_omega = {full[kColDwx], full[kColDwy], full[kColDwz]};
  if (cfg.model == ModelKind::FiveParam || cfg.model == ModelKind::SixParam) {
    sol.omega_y1 = full[kColWy1];
  }
  if (cfg.model == ModelKind::SixParam) sol.omega_z1 = full[kColWz1];
  sol.d_f = full[kColDf];
  std::tie(sol.omega0, sol.omega1) = split_corrections(sol.d_omega, sol.omega_y1, sol.omega_z1);

  sol.match_count = matches.size();
  sol.inlier_count = stage.inliers.size();
  sol.inlier_rate = static_cast<double>(sol.inlier_count) / static_cast<double>(sol.match_count);
  double ss = 0.0;
  for (std::size_t i : stage.inliers) ss += stage.residuals[i] * stage.residuals[i];
  sol.rms_dy_inliers = stage.inliers.empty() ? 0.0 : std::sqrt(ss / stage.inliers.size());
  sol.iterations = iterations;
  sol.abs_residuals_px.reserve(matches.size());
  for (double r : stage.residuals) sol.abs_residuals_px.push_back(std::abs(r) * matches.k1.f);
  return sol;
}

}  // namespace rigfix
