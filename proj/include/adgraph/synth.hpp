#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "adgraph/corpus.hpp"
#include "adgraph/geo.hpp"
#include "adgraph/label.hpp"

namespace adgraph {

enum class SizeDistribution { singletons, heavy_tailed };
std::optional<SizeDistribution> parse_size_distribution(std::string_view name);
std::string_view to_string(SizeDistribution d);

struct SynthSpec {
  std::size_t n_ads = 1000;
  double dup_rate = 0.9;
  /// 0 derives the count from the size distribution.
  std::size_t n_components = 0;
  SizeDistribution sizes = SizeDistribution::heavy_tailed;
  double obfuscation_rate = 0.3;
  /// Share of duplicates written as small edits rather than exact copies.
  double near_dup_fraction = 0.3;
  /// Share of multi-ad components given a location span above 300 miles.
  double far_span_fraction = 0.25;
  std::uint64_t seed = 1;

  /// Throws ConfigError for rates outside [0, 1] or more components than
  /// canonical ads.
  void validate() const;
  std::size_t canonical_count() const;
  std::size_t component_count() const;
};

struct PlantedCluster {
  std::string canonical_id;
  std::vector<std::string> member_ids;  // sorted, includes canonical
  std::vector<std::string> near_ids;    // members written as edited copies
};

struct PlantedComponent {
  std::vector<std::string> members;  // canonical ids, sorted
  HtrpFeatures features;
  int htrp_label = 0;  // under the default LabelingConfig
};

struct GroundTruth {
  std::vector<PlantedCluster> clusters;      // sorted by canonical id
  std::vector<PlantedComponent> components;  // sorted by first member
  std::map<std::string, std::vector<std::string>> identifiers;  // ad id -> identifier keys
};

struct SynthCorpus {
  std::vector<AdRecord> ads;
  GroundTruth truth;
};

/// Deterministic under `spec.seed`. Locations are drawn from `gazetteer`.
SynthCorpus generate(const SynthSpec& spec, const Gazetteer& gazetteer);

std::string ground_truth_to_json(const GroundTruth& truth);
GroundTruth ground_truth_from_json(std::string_view json_text);

/// Writes `<dir>/corpus.jsonl` and `<dir>/ground_truth.json`.
void write_synth(const SynthCorpus& corpus, const std::filesystem::path& dir);

}  // namespace adgraph
