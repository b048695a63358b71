#pragma once

#include <filesystem>
#include <optional>
#include <string>

#include "rigfix/correspondence.hpp"
#include "rigfix/gating.hpp"
#include "rigfix/solver.hpp"

namespace rigfix::cli {

/// Settings shared by the match, solve, rectify and compare-models commands.
struct PipelineConfig {
  std::optional<Intrinsics> k0;
  std::optional<Intrinsics> k1;
  HarrisConfig harris;
  MatcherConfig matcher;
  SolverConfig solver;
  GateConfig gate;

  void validate() const;
};

/// Reads {"k0", "k1", "harris", "matcher", "solver", "gate"} from a JSON
/// file. Unknown keys are rejected. Throws IoError or ConfigError.
PipelineConfig load_pipeline_config(const std::filesystem::path& path);

/// Parses "f,cx,cy".
Intrinsics parse_intrinsics(const std::string& text);

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& text);

}  // namespace rigfix::cli
