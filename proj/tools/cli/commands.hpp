#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "pipeline_config.hpp"
#include "rigfix/simulator.hpp"

namespace rigfix::cli {

enum ExitCode : int {
  kExitOk = 0,
  kExitFailure = 1,
  kExitIo = 2,
  kExitConfig = 3,
  kExitMonoFallback = 4,
};

struct MatchOptions {
  std::filesystem::path left;
  std::filesystem::path right;
  std::filesystem::path output = "matches.csv";
};

struct SolveOptions {
  std::filesystem::path matches;
  std::filesystem::path output = "report.json";
};

struct RectifyOptions {
  std::filesystem::path left;
  std::filesystem::path right;
  std::filesystem::path report;
  std::optional<std::filesystem::path> matches;
  std::filesystem::path out_dir = ".";
};

struct SimulateOptions {
  std::filesystem::path out_dir = ".";
  Generation generation = Generation::Exact;
  bool images = false;
  double plane_disparity = 0.02;
  int batch = 0;
  std::optional<std::filesystem::path> fixtures_dir;
};

struct CompareOptions {
  std::filesystem::path fixtures;
  std::filesystem::path output = "table.csv";
};

int cmd_match(const MatchOptions& opt, const PipelineConfig& cfg, std::ostream& out);
int cmd_solve(const SolveOptions& opt, const PipelineConfig& cfg, std::ostream& out);
int cmd_rectify(const RectifyOptions& opt, const PipelineConfig& cfg, std::ostream& out);
int cmd_simulate(const SimulateOptions& opt, const SimConfig& sim, const PipelineConfig& cfg,
                 std::ostream& out);
int cmd_compare_models(const CompareOptions& opt, const PipelineConfig& cfg, std::ostream& out);

/// Parses a full command line (without the program name) and runs it,
/// mapping library errors to exit codes.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace rigfix::cli
