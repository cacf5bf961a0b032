#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "adgraph/corpus.hpp"
#include "adgraph/dedup.hpp"
#include "adgraph/graph.hpp"
#include "adgraph/label.hpp"
#include "adgraph/synth.hpp"

namespace adgraph {

enum class StratumKey { location, source, month };
std::optional<StratumKey> parse_stratum_key(std::string_view name);
std::string_view to_string(StratumKey k);

/// Labeling overrides applied to the baseline to form the compared variant.
struct VariantOverrides {
  std::optional<double> distance_threshold_miles;
  std::optional<std::size_t> phone_count_threshold;
  std::optional<RuleCombination> rule_combination;
  std::optional<FeatureScope> feature_scope;
};

struct PipelineConfig {
  std::filesystem::path work_dir = "work";
  std::filesystem::path input_path;
  CorpusFormat input_format = CorpusFormat::jsonl;
  std::filesystem::path annotations_path;
  std::filesystem::path gazetteer_path;
  std::uint64_t seed = 42;
  unsigned threads = 0;  // 0: hardware concurrency

  SimilarityConfig similarity;
  GraphConfig graph;
  LabelingConfig labeling;

  StratumKey compare_strata = StratumKey::location;
  VariantOverrides compare_variant;

  GraphFormat export_format = GraphFormat::graphml;
  std::optional<std::uint32_t> export_component;

  SynthSpec synth;
  std::filesystem::path synth_output_dir;  // empty: <work_dir>/synth

  bool stage_synth = false;
  bool stage_stats = true;
  bool stage_compare = true;
  bool stage_export = true;

  /// Applies one `key = value` setting. Relative paths resolve against
  /// `base_dir`. Throws ConfigError naming the key.
  void set(std::string_view key, std::string_view value, const std::filesystem::path& base_dir = {});

  /// Copies `seed` into every seeded module config and validates them.
  void finalize();

  unsigned effective_threads() const;
  std::filesystem::path synth_dir() const;
  /// The corpus read by `ingest`: input.path, or the synth corpus when the
  /// synth stage is enabled and no input is set.
  std::filesystem::path corpus_path() const;
  LabelingConfig variant_labeling() const;

  /// Canonical `key = value` listing of every output-affecting setting.
  std::string canonical_text() const;

  /// Documented keys, in listing order.
  static const std::vector<std::string>& keys();
};

/// Parses a config file: one `key = value` per line, `#` starts a comment.
/// Unknown keys and malformed values throw ConfigError with the key.
PipelineConfig load_config(const std::filesystem::path& path);
PipelineConfig parse_config(std::string_view content, const std::filesystem::path& base_dir = {});

/// Applies `key=value` overrides in order.
void apply_overrides(PipelineConfig& cfg, const std::vector<std::string>& assignments);

}  // namespace adgraph
