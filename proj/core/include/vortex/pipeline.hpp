#pragma once

#include <filesystem>
#include <optional>
#include <string>

namespace vortex {

/// Resolved invocation: config text already loaded, output root decided.
struct RunConfig {
  std::string config_path;
  std::string config_text;
  std::filesystem::path out_dir = "out";
  int jobs = 1;
  bool resume = false;
  std::optional<double> eps_override;
};

/// Run one subcommand (euler | layers | viscous | verify) end to end: solve,
/// write artifacts under a per-run directory, and append a manifest record to
/// <out_dir>/manifest.jsonl. A record is appended even when the run fails.
///
/// Returns the process exit code: 0 success, 2 configuration or data error,
/// 3 resolution infeasible under the configured caps, 4 solver failure.
int dispatch(const std::string& subcommand, const RunConfig& rc);

}  // namespace vortex
