#include "adgraph/graph.hpp"

#include <algorithm>
#include <map>
#include <set>

#include <json.hpp>

#include "adgraph/error.hpp"
#include "adgraph/io.hpp"
#include "adgraph/union_find.hpp"

namespace adgraph {

std::optional<std::uint32_t> RelatednessGraph::index_of(std::string_view ad_id) const {
  const auto it = std::lower_bound(nodes.begin(), nodes.end(), ad_id);
  if (it == nodes.end() || *it != ad_id) return std::nullopt;
  return static_cast<std::uint32_t>(it - nodes.begin());
}

std::size_t RelatednessGraph::largest_component_size() const {
  std::size_t best = 0;
  for (const auto& c : components) best = std::max(best, c.size());
  return best;
}

RelatednessGraph build_graph(std::span<const DuplicateCluster> clusters,
                             const IdentifierTable& identifiers, const GraphConfig& cfg) {
  RelatednessGraph g;
  std::vector<const DuplicateCluster*> sorted;
  sorted.reserve(clusters.size());
  for (const auto& c : clusters) sorted.push_back(&c);
  std::sort(sorted.begin(), sorted.end(),
            [](auto* x, auto* y) { return x->canonical_id < y->canonical_id; });
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    if (i > 0 && sorted[i]->canonical_id == sorted[i - 1]->canonical_id) {
      throw InputError("duplicate canonical ad " + sorted[i]->canonical_id);
    }
    g.nodes.push_back(sorted[i]->canonical_id);
  }

  // (identifier key, node) incidences; sorting groups them by key.
  std::vector<std::pair<std::string, std::uint32_t>> incidences;
  g.node_identifiers.resize(g.nodes.size());
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    std::set<std::string> keys;
    for (const auto& member : sorted[i]->member_ids) {
      const auto it = identifiers.find(member);
      if (it == identifiers.end()) continue;
      for (const auto& id : it->second) keys.insert(id.key());
    }
    for (const auto& k : keys) incidences.emplace_back(k, static_cast<std::uint32_t>(i));
    g.node_identifiers[i].assign(keys.begin(), keys.end());
  }
  std::sort(incidences.begin(), incidences.end());

  UnionFind uf(g.nodes.size());
  std::map<std::uint64_t, std::vector<std::string>> edge_ids;
  for (std::size_t s = 0; s < incidences.size();) {
    std::size_t e = s;
    while (e < incidences.size() && incidences[e].first == incidences[s].first) ++e;
    const std::size_t group_size = e - s;
    const std::string& key = incidences[s].first;
    if (cfg.quarantine && group_size > cfg.quarantine_cap) {
      g.quarantined.push_back(key);
    } else if (group_size > 1) {
      const std::uint32_t hub = incidences[s].second;
      for (std::size_t k = s + 1; k < e; ++k) {
        const std::uint32_t other = incidences[k].second;
        uf.unite(hub, other);
        edge_ids[(static_cast<std::uint64_t>(hub) << 32) | other].push_back(key);
      }
    }
    s = e;
  }

  for (auto& [packed, shared] : edge_ids) {
    std::sort(shared.begin(), shared.end());
    g.edges.push_back({static_cast<std::uint32_t>(packed >> 32), static_cast<std::uint32_t>(packed),
                       std::move(shared)});
  }

  g.component_of.assign(g.nodes.size(), 0);
  std::vector<std::int64_t> component_of_root(g.nodes.size(), -1);
  for (std::uint32_t i = 0; i < g.nodes.size(); ++i) {
    const std::uint32_t root = uf.find(i);
    if (component_of_root[root] < 0) {
      component_of_root[root] = static_cast<std::int64_t>(g.components.size());
      g.components.emplace_back();
    }
    const auto c = static_cast<std::uint32_t>(component_of_root[root]);
    g.component_of[i] = c;
    g.components[c].push_back(i);
  }
  return g;
}

std::size_t ComponentStats::bucket_of(std::size_t n) {
  if (n <= 1) return 0;
  if (n <= 10) return 1;
  if (n <= 100) return 2;
  if (n <= 1000) return 3;
  return 4;
}

ComponentStats component_stats(const RelatednessGraph& graph) {
  ComponentStats stats;
  for (const auto& c : graph.components) {
    ++stats.buckets[ComponentStats::bucket_of(c.size())];
    stats.largest_size = std::max(stats.largest_size, c.size());
  }
  stats.total_components = graph.components.size();
  return stats;
}

std::string component_stats_csv(const ComponentStats& stats) {
  std::string out = "bucket,count\n";
  for (std::size_t i = 0; i < stats.buckets.size(); ++i) {
    out += std::string(ComponentStats::kBucketNames[i]) + "," + std::to_string(stats.buckets[i]) + "\n";
  }
  out += "total," + std::to_string(stats.total_components) + "\n";
  return out;
}

std::optional<GraphFormat> parse_graph_format(std::string_view name) {
  if (name == "graphml") return GraphFormat::graphml;
  if (name == "dot") return GraphFormat::dot;
  return std::nullopt;
}

namespace {

std::string xml_escape(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      case '\'': out += "&apos;"; break;
      default: out.push_back(c);
    }
  }
  return out;
}

std::string dot_quote(std::string_view s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"' || c == '\\') out.push_back('\\');
    if (c == '\n') {
      out += "\\n";
      continue;
    }
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

std::string join(const std::vector<std::string>& parts, char sep) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i) out.push_back(sep);
    out += parts[i];
  }
  return out;
}

}  // namespace

std::string render_graph(const RelatednessGraph& g, GraphFormat format,
                         std::optional<std::uint32_t> component) {
  if (component && *component >= g.components.size()) {
    throw InputError("no component " + std::to_string(*component));
  }
  auto keep = [&](std::uint32_t node) { return !component || g.component_of[node] == *component; };

  std::string out;
  if (format == GraphFormat::graphml) {
    out += "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    out += "<graphml xmlns=\"http://graphml.graphdrawing.org/xmlns\">\n";
    out += "  <key id=\"materialization\" for=\"graph\" attr.name=\"materialization\" attr.type=\"string\"/>\n";
    out += "  <key id=\"ad_id\" for=\"node\" attr.name=\"ad_id\" attr.type=\"string\"/>\n";
    out += "  <key id=\"component\" for=\"node\" attr.name=\"component\" attr.type=\"int\"/>\n";
    out += "  <key id=\"identifiers\" for=\"edge\" attr.name=\"identifiers\" attr.type=\"string\"/>\n";
    out += "  <graph id=\"relatedness\" edgedefault=\"undirected\">\n";
    out += "    <data key=\"materialization\">star</data>\n";
    for (std::uint32_t i = 0; i < g.nodes.size(); ++i) {
      if (!keep(i)) continue;
      const auto id = xml_escape(g.nodes[i]);
      out += "    <node id=\"" + id + "\"><data key=\"ad_id\">" + id + "</data><data key=\"component\">" +
             std::to_string(g.component_of[i]) + "</data></node>\n";
    }
    for (const auto& e : g.edges) {
      if (!keep(e.a)) continue;
      out += "    <edge source=\"" + xml_escape(g.nodes[e.a]) + "\" target=\"" + xml_escape(g.nodes[e.b]) +
             "\"><data key=\"identifiers\">" + xml_escape(join(e.shared, ';')) + "</data></edge>\n";
    }
    out += "  </graph>\n</graphml>\n";
  } else {
    out += "graph relatedness {\n";
    out += "  graph [materialization=\"star\"];\n";
    for (std::uint32_t i = 0; i < g.nodes.size(); ++i) {
      if (!keep(i)) continue;
      out += "  " + dot_quote(g.nodes[i]) + " [component=" + std::to_string(g.component_of[i]) + "];\n";
    }
    for (const auto& e : g.edges) {
      if (!keep(e.a)) continue;
      out += "  " + dot_quote(g.nodes[e.a]) + " -- " + dot_quote(g.nodes[e.b]) +
             " [identifiers=" + dot_quote(join(e.shared, ';')) + "];\n";
    }
    out += "}\n";
  }
  return out;
}

void export_graph(const RelatednessGraph& graph, GraphFormat format,
                  const std::filesystem::path& path, std::optional<std::uint32_t> component) {
  io::write_file(path, render_graph(graph, format, component));
}

std::string graph_to_json(const RelatednessGraph& g) {
  nlohmann::ordered_json j;
  j["materialization"] = "star";
  auto& nodes = j["nodes"] = nlohmann::ordered_json::array();
  for (std::size_t i = 0; i < g.nodes.size(); ++i) {
    nlohmann::ordered_json n;
    n["id"] = g.nodes[i];
    n["component"] = g.component_of[i];
    n["identifiers"] = g.node_identifiers[i];
    nodes.push_back(std::move(n));
  }
  auto& edges = j["edges"] = nlohmann::ordered_json::array();
  for (const auto& e : g.edges) {
    nlohmann::ordered_json x;
    x["a"] = g.nodes[e.a];
    x["b"] = g.nodes[e.b];
    x["shared"] = e.shared;
    edges.push_back(std::move(x));
  }
  j["quarantined"] = g.quarantined;
  return j.dump(-1, ' ', false, nlohmann::json::error_handler_t::replace) + "\n";
}

RelatednessGraph graph_from_json(std::string_view json_text) {
  RelatednessGraph g;
  try {
    const auto j = nlohmann::json::parse(json_text);
    for (const auto& n : j.at("nodes")) {
      g.nodes.push_back(n.at("id").get<std::string>());
      g.component_of.push_back(n.at("component").get<std::uint32_t>());
      g.node_identifiers.push_back(n.at("identifiers").get<std::vector<std::string>>());
    }
    if (!std::is_sorted(g.nodes.begin(), g.nodes.end())) throw InputError("graph nodes are not sorted");
    for (std::uint32_t i = 0; i < g.nodes.size(); ++i) {
      const auto c = g.component_of[i];
      if (c >= g.components.size()) g.components.resize(c + 1);
      g.components[c].push_back(i);
    }
    for (const auto& e : j.at("edges")) {
      const auto a = g.index_of(e.at("a").get<std::string>());
      const auto b = g.index_of(e.at("b").get<std::string>());
      if (!a || !b) throw InputError("edge references an unknown node");
      g.edges.push_back({*a, *b, e.at("shared").get<std::vector<std::string>>()});
    }
    g.quarantined = j.at("quarantined").get<std::vector<std::string>>();
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("invalid graph artifact: ") + e.what());
  }
  return g;
}

}  // namespace adgraph
