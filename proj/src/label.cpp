#include "adgraph/label.hpp"

#include <algorithm>
#include <cmath>
#include <array>
#include <functional>
#include <map>
#include <numeric>
#include <set>
#include <unordered_set>

#include <json.hpp>

#include "adgraph/dedup.hpp"
#include "adgraph/error.hpp"
#include "adgraph/io.hpp"
#include "adgraph/parallel.hpp"
#include "adgraph/rng.hpp"

namespace adgraph {

std::string_view to_string(Split s) { return s == Split::train ? "train" : "test"; }
std::string_view to_string(RuleCombination c) { return c == RuleCombination::any ? "or" : "and"; }
std::string_view to_string(FeatureScope s) { return s == FeatureScope::component ? "component" : "ad"; }

void LabelingConfig::validate() const {
  if (!(pair_sim_threshold > 0.0)) throw ConfigError("labeling.pair_sim_threshold", "must be positive");
  if (!(distance_threshold_miles > 0.0)) {
    throw ConfigError("labeling.distance_threshold_miles", "must be positive");
  }
  if (phone_count_threshold == 0) throw ConfigError("labeling.phone_count_threshold", "must be positive");
  if (!(split_ratio > 0.0 && split_ratio < 1.0)) {
    throw ConfigError("labeling.split_ratio", "must be in (0, 1)");
  }
}

// ---------------------------------------------------------------------------
// Split

SplitAssignment split_components(const RelatednessGraph& graph, const LabelingConfig& cfg) {
  cfg.validate();
  const std::size_t nc = graph.components.size();
  std::vector<std::uint32_t> order(nc);
  std::iota(order.begin(), order.end(), 0u);
  std::vector<std::uint64_t> tie_key(nc);
  for (std::size_t c = 0; c < nc; ++c) tie_key[c] = mix64(cfg.seed ^ mix64(c + 0x51u));
  std::sort(order.begin(), order.end(), [&](std::uint32_t x, std::uint32_t y) {
    const auto sx = graph.components[x].size(), sy = graph.components[y].size();
    if (sx != sy) return sx > sy;
    if (tie_key[x] != tie_key[y]) return tie_key[x] < tie_key[y];
    return x < y;
  });

  SplitAssignment out;
  out.of_component.assign(nc, Split::train);
  const double total = static_cast<double>(graph.nodes.size());
  const double target_train = cfg.split_ratio * total;
  const double target_test = total - target_train;
  for (std::uint32_t c : order) {
    const double deficit_train = target_train - static_cast<double>(out.train_ads);
    const double deficit_test = target_test - static_cast<double>(out.test_ads);
    const std::size_t size = graph.components[c].size();
    if (deficit_train >= deficit_test) {
      out.of_component[c] = Split::train;
      out.train_ads += size;
    } else {
      out.of_component[c] = Split::test;
      out.test_ads += size;
    }
  }
  if (total > 0) {
    out.deviation = static_cast<double>(out.train_ads) / total - cfg.split_ratio;
    out.giant_component_share = static_cast<double>(graph.largest_component_size()) / total;
  }
  return out;
}

std::string split_to_json(const RelatednessGraph& graph, const SplitAssignment& split) {
  nlohmann::ordered_json j;
  j["train_ads"] = split.train_ads;
  j["test_ads"] = split.test_ads;
  j["deviation"] = split.deviation;
  j["giant_component_share"] = split.giant_component_share;
  auto& comps = j["components"] = nlohmann::ordered_json::array();
  for (std::size_t c = 0; c < split.of_component.size(); ++c) {
    nlohmann::ordered_json x;
    x["component"] = c;
    x["size"] = graph.components[c].size();
    x["split"] = to_string(split.of_component[c]);
    comps.push_back(std::move(x));
  }
  return j.dump() + "\n";
}

std::string split_report_json(const SplitAssignment& split) {
  nlohmann::ordered_json j;
  j["train_ads"] = split.train_ads;
  j["test_ads"] = split.test_ads;
  j["deviation"] = split.deviation;
  j["giant_component_share"] = split.giant_component_share;
  return j.dump(2) + "\n";
}

SplitAssignment split_from_json(const RelatednessGraph& graph, std::string_view json_text) {
  SplitAssignment out;
  try {
    const auto j = nlohmann::json::parse(json_text);
    out.train_ads = j.at("train_ads").get<std::size_t>();
    out.test_ads = j.at("test_ads").get<std::size_t>();
    out.deviation = j.at("deviation").get<double>();
    out.giant_component_share = j.at("giant_component_share").get<double>();
    const auto& comps = j.at("components");
    if (comps.size() != graph.components.size()) {
      throw InputError("split artifact does not match the graph's components");
    }
    for (const auto& c : comps) {
      const auto s = c.at("split").get<std::string>();
      if (s != "train" && s != "test") throw InputError("unknown split " + s);
      out.of_component.push_back(s == "train" ? Split::train : Split::test);
    }
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("invalid split artifact: ") + e.what());
  }
  return out;
}

// ---------------------------------------------------------------------------
// Pair sampling

namespace {

constexpr std::uint64_t kEnumerateLimit = 4'000'000;
constexpr std::size_t kSimilarityBatch = 256;

std::uint64_t pairs_of(std::uint64_t k) { return k < 2 ? 0 : k * (k - 1) / 2; }

std::uint64_t pack(std::uint32_t i, std::uint32_t j) {
  if (i > j) std::swap(i, j);
  return (static_cast<std::uint64_t>(i) << 32) | j;
}

struct Accepted {
  std::uint64_t pair;
  double similarity;
};

// Pulls candidate pairs from `next` until `want` are accepted or the
// candidates run out. Similarities are computed in parallel per batch and
// accepted in draw order, so the result does not depend on thread count.
template <typename Next>
std::vector<Accepted> accept_pairs(Next&& next, std::size_t want, std::span<const std::u32string> texts,
                                   double threshold, unsigned threads, std::size_t& discarded) {
  std::vector<Accepted> out;
  std::vector<std::uint64_t> batch;
  std::vector<double> sims;
  bool exhausted = false;
  while (out.size() < want && !exhausted) {
    batch.clear();
    while (batch.size() < kSimilarityBatch) {
      std::uint64_t p;
      if (!next(p)) {
        exhausted = true;
        break;
      }
      batch.push_back(p);
    }
    sims.assign(batch.size(), 0.0);
    parallel_for(batch.size(), threads, [&](std::size_t k) {
      sims[k] = similarity(texts[batch[k] >> 32], texts[batch[k] & 0xFFFFFFFFu]);
    });
    for (std::size_t k = 0; k < batch.size() && out.size() < want; ++k) {
      if (sims[k] >= threshold) {
        ++discarded;
        continue;
      }
      out.push_back({batch[k], sims[k]});
    }
  }
  return out;
}

// Candidate stream: a shuffled full enumeration when small, rejection
// sampling without replacement otherwise.
class PairStream {
 public:
  template <typename Enumerate, typename Draw>
  PairStream(std::uint64_t total, std::uint64_t enumerate_cost, Rng& rng, Enumerate&& enumerate,
             Draw&& draw, std::size_t want)
      : rng_(rng), total_(total) {
    if (enumerate_cost <= kEnumerateLimit) {
      enumerate(all_);
      rng_.shuffle(all_.begin(), all_.end());
      enumerated_ = true;
    } else {
      draw_ = std::forward<Draw>(draw);
      max_attempts_ = std::max<std::uint64_t>(100'000, 50 * static_cast<std::uint64_t>(want));
    }
  }

  bool operator()(std::uint64_t& out) {
    if (enumerated_) {
      if (pos_ >= all_.size()) return false;
      out = all_[pos_++];
      return true;
    }
    while (attempts_ < max_attempts_ && seen_.size() < total_) {
      ++attempts_;
      const std::uint64_t p = draw_(rng_);
      if (seen_.insert(p).second) {
        out = p;
        return true;
      }
    }
    return false;
  }

 private:
  Rng& rng_;
  std::uint64_t total_;
  bool enumerated_ = false;
  std::vector<std::uint64_t> all_;
  std::size_t pos_ = 0;
  std::function<std::uint64_t(Rng&)> draw_;
  std::unordered_set<std::uint64_t> seen_;
  std::uint64_t attempts_ = 0;
  std::uint64_t max_attempts_ = 0;
};

}  // namespace

OadResult generate_oad_pairs(const RelatednessGraph& graph, std::span<const std::u32string> node_texts,
                             const SplitAssignment& split, const LabelingConfig& cfg, unsigned threads) {
  cfg.validate();
  if (node_texts.size() != graph.nodes.size()) {
    throw InputError("OAD sampling: node texts are not aligned with graph nodes");
  }
  if (graph.components.size() < 2) {
    throw InputError("OAD sampling needs at least two components to form negative pairs");
  }
  if (split.of_component.size() != graph.components.size()) {
    throw InputError("OAD sampling: split does not match graph components");
  }

  auto eligible = [&](std::size_t c) {
    return cfg.max_component_size_for_pairs == 0 ||
           graph.components[c].size() <= cfg.max_component_size_for_pairs;
  };

  OadResult result;

  // Positives: within-component pairs.
  std::vector<std::uint32_t> pos_components;
  std::vector<std::uint64_t> pos_cumulative;
  std::uint64_t pos_total = 0;
  for (std::uint32_t c = 0; c < graph.components.size(); ++c) {
    if (!eligible(c) || graph.components[c].size() < 2) continue;
    pos_total += pairs_of(graph.components[c].size());
    pos_components.push_back(c);
    pos_cumulative.push_back(pos_total);
  }
  Rng pos_rng(cfg.seed, 0x905171e5);
  PairStream pos_stream(
      pos_total, pos_total, pos_rng,
      [&](std::vector<std::uint64_t>& all) {
        all.reserve(pos_total);
        for (std::uint32_t c : pos_components) {
          const auto& m = graph.components[c];
          for (std::size_t x = 0; x < m.size(); ++x) {
            for (std::size_t y = x + 1; y < m.size(); ++y) all.push_back(pack(m[x], m[y]));
          }
        }
      },
      [&](Rng& rng) {
        const std::uint64_t r = rng.below(pos_total);
        const auto k = static_cast<std::size_t>(
            std::upper_bound(pos_cumulative.begin(), pos_cumulative.end(), r) - pos_cumulative.begin());
        const auto& m = graph.components[pos_components[k]];
        const auto x = rng.below(m.size());
        auto y = rng.below(m.size() - 1);
        if (y >= x) ++y;
        return pack(m[x], m[y]);
      },
      cfg.pairs_per_class);
  const auto positives = accept_pairs(pos_stream, cfg.pairs_per_class, node_texts, cfg.pair_sim_threshold,
                                      threads, result.discarded_similar);

  // Negatives: cross-component pairs whose components share a split.
  std::array<std::vector<std::uint32_t>, 2> split_nodes;
  std::array<std::uint64_t, 2> split_cross{0, 0};
  std::uint64_t enumerate_cost = 0;
  for (std::uint32_t c = 0; c < graph.components.size(); ++c) {
    if (!eligible(c)) continue;
    const auto s = static_cast<std::size_t>(split.of_component[c]);
    for (auto n : graph.components[c]) split_nodes[s].push_back(n);
    split_cross[s] -= pairs_of(graph.components[c].size());
  }
  for (std::size_t s = 0; s < 2; ++s) {
    std::sort(split_nodes[s].begin(), split_nodes[s].end());
    split_cross[s] += pairs_of(split_nodes[s].size());
    enumerate_cost += pairs_of(split_nodes[s].size());
  }
  const std::uint64_t neg_total = split_cross[0] + split_cross[1];
  Rng neg_rng(cfg.seed, 0x4e6a7e5);
  PairStream neg_stream(
      neg_total, enumerate_cost, neg_rng,
      [&](std::vector<std::uint64_t>& all) {
        all.reserve(neg_total);
        for (const auto& nodes : split_nodes) {
          for (std::size_t x = 0; x < nodes.size(); ++x) {
            for (std::size_t y = x + 1; y < nodes.size(); ++y) {
              if (graph.component_of[nodes[x]] != graph.component_of[nodes[y]]) {
                all.push_back(pack(nodes[x], nodes[y]));
              }
            }
          }
        }
      },
      [&](Rng& rng) {
        const std::size_t s = rng.below(neg_total) < split_cross[0] ? 0 : 1;
        const auto& nodes = split_nodes[s];
        while (true) {
          const auto x = rng.below(nodes.size());
          auto y = rng.below(nodes.size() - 1);
          if (y >= x) ++y;
          if (graph.component_of[nodes[x]] != graph.component_of[nodes[y]]) return pack(nodes[x], nodes[y]);
        }
      },
      cfg.pairs_per_class);
  const auto negatives = accept_pairs(neg_stream, positives.size(), node_texts, cfg.pair_sim_threshold,
                                      threads, result.discarded_similar);

  const std::size_t balanced = std::min(positives.size(), negatives.size());
  result.positives = balanced;
  result.negatives = balanced;
  auto emit = [&](const Accepted& acc, int label) {
    const auto i = static_cast<std::uint32_t>(acc.pair >> 32);
    const auto j = static_cast<std::uint32_t>(acc.pair);
    result.pairs.push_back({graph.nodes[i], graph.nodes[j], label, acc.similarity,
                            split.of_component[graph.component_of[i]]});
  };
  for (std::size_t k = 0; k < balanced; ++k) emit(positives[k], 1);
  for (std::size_t k = 0; k < balanced; ++k) emit(negatives[k], 0);
  return result;
}

std::string to_jsonl(const LabeledPair& p) {
  nlohmann::ordered_json j;
  j["a"] = p.a;
  j["b"] = p.b;
  j["label"] = p.label;
  j["similarity"] = p.similarity;
  j["split"] = to_string(p.split);
  return j.dump(-1, ' ', false, nlohmann::json::error_handler_t::replace);
}

// ---------------------------------------------------------------------------
// HTRP

HtrpFeatures compute_features(std::span<const std::string> locations,
                              std::span<const std::string> identifier_keys, const Gazetteer& gazetteer) {
  HtrpFeatures f;
  std::map<std::string, GeoPoint> resolved;
  std::set<std::string> unresolved;
  for (const auto& loc : locations) {
    auto key = location_key(loc);
    if (key.empty()) continue;
    if (auto p = gazetteer.lookup(key)) {
      resolved.emplace(std::move(key), *p);
    } else {
      unresolved.insert(std::move(key));
    }
  }
  std::vector<GeoPoint> points;
  for (const auto& [_, p] : resolved) points.push_back(p);
  for (std::size_t i = 0; i < points.size(); ++i) {
    for (std::size_t j = i + 1; j < points.size(); ++j) {
      f.max_span_miles = std::max(f.max_span_miles, haversine_miles(points[i], points[j]));
    }
  }
  f.unresolved_locations = unresolved.size();
  std::set<std::string_view> ids(identifier_keys.begin(), identifier_keys.end());
  f.unique_identifier_count = ids.size();
  f.unique_phone_count = static_cast<std::size_t>(
      std::count_if(ids.begin(), ids.end(), [](std::string_view k) { return k.starts_with("phone:"); }));
  return f;
}

LabeledAd apply_rules(std::string ad_id, const HtrpFeatures& features, const LabelingConfig& cfg) {
  LabeledAd out;
  out.ad_id = std::move(ad_id);
  out.features = features;
  const bool distance = features.max_span_miles > cfg.distance_threshold_miles;
  const bool phones = features.unique_phone_count >= cfg.phone_count_threshold;
  if (distance) out.rule_trace.emplace_back(kRuleDistance);
  if (phones) out.rule_trace.emplace_back(kRulePhones);
  const bool fires = cfg.rule_combination == RuleCombination::any ? (distance || phones) : (distance && phones);
  out.label = fires ? 1 : 0;
  return out;
}

std::vector<LabeledAd> label_htrp(const RelatednessGraph& graph,
                                  std::span<const std::vector<std::string>> node_locations,
                                  const Gazetteer& gazetteer, const LabelingConfig& cfg) {
  cfg.validate();
  if (gazetteer.empty()) throw ConfigError("gazetteer.path", "gazetteer has no entries");
  if (node_locations.size() != graph.nodes.size()) {
    throw InputError("HTRP labeling: node locations are not aligned with graph nodes");
  }

  std::vector<LabeledAd> out(graph.nodes.size());
  if (cfg.feature_scope == FeatureScope::ad) {
    for (std::size_t i = 0; i < graph.nodes.size(); ++i) {
      out[i] = apply_rules(graph.nodes[i],
                           compute_features(node_locations[i], graph.node_identifiers[i], gazetteer), cfg);
    }
    return out;
  }
  for (const auto& members : graph.components) {
    std::vector<std::string> locations;
    std::vector<std::string> keys;
    for (auto n : members) {
      locations.insert(locations.end(), node_locations[n].begin(), node_locations[n].end());
      keys.insert(keys.end(), graph.node_identifiers[n].begin(), graph.node_identifiers[n].end());
    }
    const HtrpFeatures f = compute_features(locations, keys, gazetteer);
    for (auto n : members) out[n] = apply_rules(graph.nodes[n], f, cfg);
  }
  return out;
}

std::string to_jsonl(const LabeledAd& ad) {
  nlohmann::ordered_json j;
  j["ad_id"] = ad.ad_id;
  j["label"] = ad.label;
  nlohmann::ordered_json f;
  f["max_span_miles"] = ad.features.max_span_miles;
  f["unique_phone_count"] = ad.features.unique_phone_count;
  f["unique_identifier_count"] = ad.features.unique_identifier_count;
  f["unresolved_locations"] = ad.features.unresolved_locations;
  j["features"] = std::move(f);
  j["rule_trace"] = ad.rule_trace;
  return j.dump(-1, ' ', false, nlohmann::json::error_handler_t::replace);
}

std::vector<LabeledAd> read_labeled_ads_jsonl(const std::filesystem::path& path) {
  const std::string content = io::read_file(path);
  std::vector<LabeledAd> out;
  io::for_each_line(content, [&](std::string_view line, std::size_t line_no) {
    if (line.empty()) return;
    try {
      const auto j = nlohmann::json::parse(line);
      LabeledAd ad;
      ad.ad_id = j.at("ad_id").get<std::string>();
      ad.label = j.at("label").get<int>();
      const auto& f = j.at("features");
      ad.features.max_span_miles = f.at("max_span_miles").get<double>();
      ad.features.unique_phone_count = f.at("unique_phone_count").get<std::size_t>();
      ad.features.unique_identifier_count = f.at("unique_identifier_count").get<std::size_t>();
      ad.features.unresolved_locations = f.at("unresolved_locations").get<std::size_t>();
      ad.rule_trace = j.at("rule_trace").get<std::vector<std::string>>();
      out.push_back(std::move(ad));
    } catch (const nlohmann::json::exception& e) {
      throw InputError(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
  });
  return out;
}

}  // namespace adgraph
