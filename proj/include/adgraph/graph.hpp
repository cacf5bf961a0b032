#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "adgraph/dedup.hpp"
#include "adgraph/extract.hpp"

namespace adgraph {

struct GraphEdge {
  std::uint32_t a = 0;  // node indices, a < b
  std::uint32_t b = 0;
  std::vector<std::string> shared;  // identifier keys, sorted
  bool operator==(const GraphEdge&) const = default;
};

/// Relatedness graph over canonical ads. Nodes are sorted by ad id.
/// Components come from union-find over identifier groups (the full
/// clique expansion); `edges` materializes each identifier group as a star
/// rooted at its first node.
struct RelatednessGraph {
  std::vector<std::string> nodes;
  std::vector<std::vector<std::string>> node_identifiers;  // sorted keys per node
  std::vector<GraphEdge> edges;
  std::vector<std::uint32_t> component_of;             // per node
  std::vector<std::vector<std::uint32_t>> components;  // sorted member nodes
  std::vector<std::string> quarantined;                // identifier keys left out

  std::optional<std::uint32_t> index_of(std::string_view ad_id) const;
  std::size_t largest_component_size() const;
  bool operator==(const RelatednessGraph&) const = default;
};

struct GraphConfig {
  bool quarantine = false;
  std::size_t quarantine_cap = 1000;
};

/// `identifiers` holds per-ad identifiers for any ad; each canonical ad
/// receives the union over its duplicate cluster.
RelatednessGraph build_graph(std::span<const DuplicateCluster> clusters,
                             const IdentifierTable& identifiers, const GraphConfig& cfg = {});

/// Component size histogram with buckets [1], [2,10], (10,100],
/// (100,1000], (1000,inf).
struct ComponentStats {
  static constexpr std::array<std::string_view, 5> kBucketNames{"1", "2-10", "10-100",
                                                                "100-1000", "1000+"};
  std::array<std::size_t, 5> buckets{};
  std::size_t total_components = 0;
  std::size_t largest_size = 0;

  static std::size_t bucket_of(std::size_t component_size);
  bool operator==(const ComponentStats&) const = default;
};

ComponentStats component_stats(const RelatednessGraph& graph);
std::string component_stats_csv(const ComponentStats& stats);

enum class GraphFormat { graphml, dot };
std::optional<GraphFormat> parse_graph_format(std::string_view name);

/// Writes GraphML or DOT. With `component` set, only that component's
/// nodes and edges are written. Throws IoError.
std::string render_graph(const RelatednessGraph& graph, GraphFormat format,
                         std::optional<std::uint32_t> component = std::nullopt);
void export_graph(const RelatednessGraph& graph, GraphFormat format,
                  const std::filesystem::path& path,
                  std::optional<std::uint32_t> component = std::nullopt);

/// JSON artifact carrying everything downstream stages need.
std::string graph_to_json(const RelatednessGraph& graph);
RelatednessGraph graph_from_json(std::string_view json_text);

}  // namespace adgraph
