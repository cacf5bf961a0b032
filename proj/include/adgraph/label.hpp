#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "adgraph/geo.hpp"
#include "adgraph/graph.hpp"

namespace adgraph {

enum class RuleCombination { any, all };  // "or" / "and"
enum class FeatureScope { component, ad };
enum class Split { train, test };

std::string_view to_string(Split s);
std::string_view to_string(RuleCombination c);
std::string_view to_string(FeatureScope s);

struct LabelingConfig {
  double pair_sim_threshold = 0.5;
  double distance_threshold_miles = 300.0;
  std::size_t phone_count_threshold = 3;
  RuleCombination rule_combination = RuleCombination::any;
  double split_ratio = 0.8;
  std::uint64_t seed = 0;
  /// Requested pairs per OAD class.
  std::size_t pairs_per_class = 5000;
  /// Components larger than this are left out of OAD sampling; 0 keeps all.
  std::size_t max_component_size_for_pairs = 0;
  FeatureScope feature_scope = FeatureScope::component;

  void validate() const;
};

// ---------------------------------------------------------------------------
// Train/test split

struct SplitAssignment {
  std::vector<Split> of_component;
  std::size_t train_ads = 0;
  std::size_t test_ads = 0;
  double deviation = 0.0;  // achieved train share - split_ratio
  double giant_component_share = 0.0;
};

/// Greedy largest-first assignment of whole components to the split
/// furthest below its target ad count. Equal-size components are ordered
/// by a seeded key.
SplitAssignment split_components(const RelatednessGraph& graph, const LabelingConfig& cfg);

std::string split_to_json(const RelatednessGraph& graph, const SplitAssignment& split);
std::string split_report_json(const SplitAssignment& split);
SplitAssignment split_from_json(const RelatednessGraph& graph, std::string_view json_text);

// ---------------------------------------------------------------------------
// Organized activity pairs

struct LabeledPair {
  std::string a;  // a < b
  std::string b;
  int label = 0;  // 1 = same component
  double similarity = 0.0;
  Split split = Split::train;
  bool operator==(const LabeledPair&) const = default;
};

struct OadResult {
  std::vector<LabeledPair> pairs;  // positives first, then negatives
  std::size_t positives = 0;
  std::size_t negatives = 0;
  std::size_t discarded_similar = 0;
};

/// Seeded sampling of within-component (positive) and cross-component
/// (negative) pairs inside one split, discarding pairs with similarity >=
/// pair_sim_threshold, balanced to the smaller class. `node_texts` are the
/// normalized texts aligned with `graph.nodes`. Throws InputError when the
/// graph has fewer than two components.
OadResult generate_oad_pairs(const RelatednessGraph& graph, std::span<const std::u32string> node_texts,
                             const SplitAssignment& split, const LabelingConfig& cfg,
                             unsigned threads = 1);

std::string to_jsonl(const LabeledPair& p);

// ---------------------------------------------------------------------------
// Trafficking-risk ad labels

struct HtrpFeatures {
  double max_span_miles = 0.0;
  std::size_t unique_phone_count = 0;
  std::size_t unique_identifier_count = 0;
  std::size_t unresolved_locations = 0;
  bool operator==(const HtrpFeatures&) const = default;
};

inline constexpr std::string_view kRuleDistance = "distance_span";
inline constexpr std::string_view kRulePhones = "phone_count";

struct LabeledAd {
  std::string ad_id;
  int label = 0;
  HtrpFeatures features;
  std::vector<std::string> rule_trace;
  bool operator==(const LabeledAd&) const = default;
};

/// Features over a set of location strings and identifier keys.
HtrpFeatures compute_features(std::span<const std::string> locations,
                              std::span<const std::string> identifier_keys, const Gazetteer& gazetteer);

/// Applies the distance and phone-count rules to precomputed features.
LabeledAd apply_rules(std::string ad_id, const HtrpFeatures& features, const LabelingConfig& cfg);

/// Labels every node. `node_locations` (aligned with graph.nodes) holds the
/// location strings of each canonical ad's duplicate cluster. Features are
/// pooled per component unless feature_scope is `ad`. Throws ConfigError
/// for an empty gazetteer.
std::vector<LabeledAd> label_htrp(const RelatednessGraph& graph,
                                  std::span<const std::vector<std::string>> node_locations,
                                  const Gazetteer& gazetteer, const LabelingConfig& cfg);

std::string to_jsonl(const LabeledAd& ad);
std::vector<LabeledAd> read_labeled_ads_jsonl(const std::filesystem::path& path);

}  // namespace adgraph
