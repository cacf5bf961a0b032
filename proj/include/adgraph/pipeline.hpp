#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "adgraph/config.hpp"

namespace adgraph {

enum class Stage {
  synth,
  ingest,
  dedup,
  extract,
  graph,
  stats,
  split,
  label_oad,
  label_htrp,
  compare,
  export_graph,
  all,
};

std::optional<Stage> parse_stage(std::string_view name);
std::string_view to_string(Stage s);
/// Subcommand names in pipeline order, ending with "all".
const std::vector<std::string>& stage_names();

struct RunOptions {
  /// Skip the stale-input check against upstream manifests.
  bool force = false;
  std::ostream* out = nullptr;  // human-readable reports; std::cout when null
  std::ostream* log = nullptr;  // progress and timings; std::cerr when null
};

/// Runs one stage (or the whole chain for Stage::all), reading upstream
/// artifacts from cfg.work_dir and writing its own plus a manifest. Throws
/// StageDependencyError, StaleInputError, ConfigError and the module errors.
void run_stage(Stage stage, const PipelineConfig& cfg, const RunOptions& opts = {});

/// run_stage with diagnostics written to the log stream. Returns 0 on
/// success, 2 for configuration errors, 3 for missing or stale upstream
/// artifacts and 1 otherwise.
int run(std::string_view stage, const PipelineConfig& cfg, const RunOptions& opts = {});

std::string version_string();

}  // namespace adgraph
