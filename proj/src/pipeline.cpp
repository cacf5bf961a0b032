#include "adgraph/pipeline.hpp"

#include <openssl/crypto.h>
#include <unicode/uvernum.h>

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <iostream>
#include <map>

#include "adgraph/analysis.hpp"
#include "adgraph/corpus.hpp"
#include "adgraph/dedup.hpp"
#include "adgraph/error.hpp"
#include "adgraph/extract.hpp"
#include "adgraph/geo.hpp"
#include "adgraph/graph.hpp"
#include "adgraph/io.hpp"
#include "adgraph/label.hpp"
#include "adgraph/manifest.hpp"
#include "adgraph/parallel.hpp"
#include "adgraph/synth.hpp"
#include "adgraph/unicode.hpp"

#ifndef ADGRAPH_VERSION
#define ADGRAPH_VERSION "unknown"
#endif

namespace adgraph {

namespace {

struct StageName {
  Stage stage;
  std::string_view name;
};

constexpr std::array<StageName, 12> kStages{{
    {Stage::synth, "synth"},
    {Stage::ingest, "ingest"},
    {Stage::dedup, "dedup"},
    {Stage::extract, "extract"},
    {Stage::graph, "graph"},
    {Stage::stats, "stats"},
    {Stage::split, "split"},
    {Stage::label_oad, "label-oad"},
    {Stage::label_htrp, "label-htrp"},
    {Stage::compare, "compare"},
    {Stage::export_graph, "export"},
    {Stage::all, "all"},
}};

}  // namespace

std::optional<Stage> parse_stage(std::string_view name) {
  for (const auto& s : kStages) {
    if (s.name == name) return s.stage;
  }
  return std::nullopt;
}

std::string_view to_string(Stage s) {
  for (const auto& e : kStages) {
    if (e.stage == s) return e.name;
  }
  return "all";
}

const std::vector<std::string>& stage_names() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> out;
    for (const auto& s : kStages) out.emplace_back(s.name);
    return out;
  }();
  return names;
}

std::string version_string() {
  return std::string("adgraph ") + ADGRAPH_VERSION + " (ICU " + U_ICU_VERSION + ", " +
         OpenSSL_version(OPENSSL_VERSION) + ", C++" + std::to_string(__cplusplus / 100 % 100) + ")";
}

namespace {

// Artifact file -> producing stage.
const std::map<std::string, Stage>& producers() {
  static const std::map<std::string, Stage> m{
      {"ads.jsonl", Stage::ingest},
      {"normalized.jsonl", Stage::ingest},
      {"rejects.jsonl", Stage::ingest},
      {"clusters.jsonl", Stage::dedup},
      {"identifiers.jsonl", Stage::extract},
      {"annotation_rejects.jsonl", Stage::extract},
      {"graph.json", Stage::graph},
      {"component_stats.csv", Stage::stats},
      {"split.json", Stage::split},
      {"split_report.json", Stage::split},
      {"oad_pairs.jsonl", Stage::label_oad},
      {"htrp_labels.jsonl", Stage::label_htrp},
      {"compare_report.json", Stage::compare},
  };
  return m;
}

class StageRun {
 public:
  StageRun(Stage stage, const PipelineConfig& cfg, const RunOptions& opts)
      : stage_(stage), cfg_(cfg), opts_(opts), start_(std::chrono::steady_clock::now()) {
    log() << "[adgraph] " << to_string(stage) << ": start\n";
  }

  std::ostream& log() const { return opts_.log ? *opts_.log : std::cerr; }
  std::ostream& out() const { return opts_.out ? *opts_.out : std::cout; }
  const PipelineConfig& cfg() const { return cfg_; }
  unsigned threads() const { return cfg_.effective_threads(); }

  /// Path of an upstream artifact, after the presence and staleness checks.
  std::filesystem::path require(const std::string& name) {
    const Stage producer = producers().at(name);
    const auto path = cfg_.work_dir / name;
    if (!std::filesystem::exists(path)) {
      throw StageDependencyError(std::string(to_string(producer)),
                                 "stage '" + std::string(to_string(stage_)) + "' needs " + path.string() +
                                     "; run the '" + std::string(to_string(producer)) + "' stage first");
    }
    const std::string hash = sha256_file(path);
    if (!opts_.force) check_fresh(producer, name, hash);
    inputs_.push_back({name, hash});
    return path;
  }

  /// Records an input that lives outside the work directory.
  void external_input(const std::filesystem::path& path) {
    if (!std::filesystem::exists(path)) throw IoError("cannot read " + path.string());
    inputs_.push_back({path.string(), sha256_file(path)});
  }

  std::filesystem::path output_path(const std::string& name) const { return cfg_.work_dir / name; }

  void output_written(const std::string& name) {
    outputs_.push_back({name, sha256_file(cfg_.work_dir / name)});
  }

  void output_text(const std::string& name, std::string_view content) {
    io::write_file(cfg_.work_dir / name, content);
    outputs_.push_back({name, sha256_hex(content)});
  }

  void external_output(const std::filesystem::path& path) { outputs_.push_back({path.string(), sha256_file(path)}); }

  void finish(const std::string& summary) {
    StageManifest m;
    m.stage = std::string(to_string(stage_));
    m.version = ADGRAPH_VERSION;
    m.config_sha256 = sha256_hex(cfg_.canonical_text());
    m.inputs = inputs_;
    m.outputs = outputs_;
    write_manifest(cfg_.work_dir, m);
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", secs);
    log() << "[adgraph] " << to_string(stage_) << ": " << summary << " (" << buf << " s)\n";
  }

 private:
  void check_fresh(Stage producer, const std::string& name, const std::string& hash) const {
    const auto manifest = read_manifest(cfg_.work_dir, to_string(producer));
    const std::string hint = "; rerun '" + std::string(to_string(producer)) + "' or pass --force";
    if (!manifest) {
      throw StaleInputError(name + " has no manifest from stage '" + std::string(to_string(producer)) + "'" + hint);
    }
    for (const auto& o : manifest->outputs) {
      if (o.path == name) {
        if (o.sha256 != hash) {
          throw StaleInputError(name + " changed after stage '" + std::string(to_string(producer)) +
                                "' wrote it" + hint);
        }
        return;
      }
    }
    throw StaleInputError(name + " is not listed in the '" + std::string(to_string(producer)) + "' manifest" + hint);
  }

  Stage stage_;
  const PipelineConfig& cfg_;
  const RunOptions& opts_;
  std::chrono::steady_clock::time_point start_;
  std::vector<ArtifactHash> inputs_;
  std::vector<ArtifactHash> outputs_;
};

Gazetteer load_gazetteer(StageRun& run) {
  const auto& path = run.cfg().gazetteer_path;
  if (path.empty()) throw ConfigError("gazetteer.path", "not set");
  run.external_input(path);
  return Gazetteer::load(path);
}

std::vector<AdRecord> read_ads(const std::filesystem::path& path) {
  return ingest(path, CorpusFormat::jsonl).records;
}

RelatednessGraph read_graph(const std::filesystem::path& path) { return graph_from_json(io::read_file(path)); }

std::string joined_lines(auto&& items) {
  std::string out;
  for (const auto& item : items) {
    out += to_jsonl(item);
    out += '\n';
  }
  return out;
}

// ---------------------------------------------------------------------------

void stage_synth(StageRun& run) {
  const Gazetteer gaz = load_gazetteer(run);
  run.cfg().synth.validate();
  const SynthCorpus corpus = generate(run.cfg().synth, gaz);
  const auto dir = run.cfg().synth_dir();
  write_synth(corpus, dir);
  run.external_output(dir / "corpus.jsonl");
  run.external_output(dir / "ground_truth.json");
  run.finish(std::to_string(corpus.ads.size()) + " ads, " + std::to_string(corpus.truth.clusters.size()) +
             " planted clusters, " + std::to_string(corpus.truth.components.size()) + " planted components");
}

void stage_ingest(StageRun& run) {
  const auto& cfg = run.cfg();
  const auto path = cfg.corpus_path();
  if (path.empty()) throw ConfigError("input.path", "not set");
  if (!std::filesystem::exists(path) && cfg.input_path.empty()) {
    throw StageDependencyError("synth", "stage 'ingest' needs " + path.string() + "; run the 'synth' stage first");
  }
  run.external_input(path);
  const IngestResult result = ingest(path, cfg.input_format);
  const auto normalized = normalize_all(result.records, run.threads());
  write_records_jsonl(run.output_path("ads.jsonl"), result.records);
  run.output_written("ads.jsonl");
  write_normalized_jsonl(run.output_path("normalized.jsonl"), normalized);
  run.output_written("normalized.jsonl");
  write_rejects_jsonl(run.output_path("rejects.jsonl"), result.rejects);
  run.output_written("rejects.jsonl");
  run.finish(std::to_string(result.records.size()) + " ads, " + std::to_string(result.rejects.size()) +
             " rejected rows");
}

void stage_dedup(StageRun& run) {
  const auto ads = read_ads(run.require("ads.jsonl"));
  const auto normalized = read_normalized_jsonl(run.require("normalized.jsonl"));
  if (ads.size() != normalized.size()) throw InputError("ads.jsonl and normalized.jsonl differ in length");
  const auto clusters = deduplicate(ads, normalized, run.cfg().similarity, run.threads());
  write_clusters_jsonl(run.output_path("clusters.jsonl"), clusters);
  run.output_written("clusters.jsonl");
  const auto near = std::count_if(clusters.begin(), clusters.end(),
                                  [](const DuplicateCluster& c) { return c.method == DedupMethod::near; });
  run.finish(std::to_string(ads.size()) + " ads -> " + std::to_string(clusters.size()) + " unique (" +
             std::to_string(near) + " clusters with near duplicates)");
}

void stage_extract(StageRun& run) {
  const auto ads = read_ads(run.require("ads.jsonl"));
  const auto normalized = read_normalized_jsonl(run.require("normalized.jsonl"));
  if (ads.size() != normalized.size()) throw InputError("ads.jsonl and normalized.jsonl differ in length");
  std::vector<std::vector<Identifier>> found(ads.size());
  parallel_for(ads.size(), run.threads(),
               [&](std::size_t i) { found[i] = extract_identifiers(ads[i], normalized[i]); });
  IdentifierTable table;
  std::size_t count = 0;
  for (std::size_t i = 0; i < ads.size(); ++i) {
    if (!found[i].empty()) table[ads[i].ad_id] = std::move(found[i]);
  }
  std::vector<AnnotationReject> rejects;
  if (!run.cfg().annotations_path.empty()) {
    run.external_input(run.cfg().annotations_path);
    auto imported = import_annotations(run.cfg().annotations_path, normalized);
    for (auto& [ad, ids] : imported.by_ad) {
      auto& slot = table[ad];
      slot = merge_identifiers(slot, ids);
    }
    rejects = std::move(imported.rejects);
  }
  for (const auto& [_, ids] : table) count += ids.size();
  write_identifiers_jsonl(run.output_path("identifiers.jsonl"), table);
  run.output_written("identifiers.jsonl");
  write_annotation_rejects_jsonl(run.output_path("annotation_rejects.jsonl"), rejects);
  run.output_written("annotation_rejects.jsonl");
  run.finish(std::to_string(count) + " identifiers on " + std::to_string(table.size()) + " ads, " +
             std::to_string(rejects.size()) + " annotation rejects");
}

void stage_graph(StageRun& run) {
  const auto clusters = read_clusters_jsonl(run.require("clusters.jsonl"));
  const auto table = read_identifiers_jsonl(run.require("identifiers.jsonl"));
  const auto graph = build_graph(clusters, table, run.cfg().graph);
  run.output_text("graph.json", graph_to_json(graph));
  run.finish(std::to_string(graph.nodes.size()) + " nodes, " + std::to_string(graph.edges.size()) + " edges, " +
             std::to_string(graph.components.size()) + " components, largest " +
             std::to_string(graph.largest_component_size()) + ", " + std::to_string(graph.quarantined.size()) +
             " quarantined identifiers");
}

void stage_stats(StageRun& run) {
  const auto graph = read_graph(run.require("graph.json"));
  const auto stats = component_stats(graph);
  const std::string csv = component_stats_csv(stats);
  run.output_text("component_stats.csv", csv);
  run.out() << csv;
  run.finish(std::to_string(stats.total_components) + " components");
}

void stage_split(StageRun& run) {
  const auto graph = read_graph(run.require("graph.json"));
  const auto split = split_components(graph, run.cfg().labeling);
  run.output_text("split.json", split_to_json(graph, split));
  run.output_text("split_report.json", split_report_json(split));
  char buf[64];
  std::snprintf(buf, sizeof buf, ", deviation %+.4f", split.deviation);
  run.finish(std::to_string(split.train_ads) + " train ads, " + std::to_string(split.test_ads) + " test ads" + buf);
}

void stage_label_oad(StageRun& run) {
  const auto graph = read_graph(run.require("graph.json"));
  const auto split = split_from_json(graph, io::read_file(run.require("split.json")));
  const auto normalized = read_normalized_jsonl(run.require("normalized.jsonl"));
  std::map<std::string_view, const NormalizedAd*> by_id;
  for (const auto& ad : normalized) by_id[ad.ad_id] = &ad;
  std::vector<std::u32string> texts(graph.nodes.size());
  for (std::size_t i = 0; i < graph.nodes.size(); ++i) {
    const auto it = by_id.find(graph.nodes[i]);
    if (it == by_id.end()) throw InputError("graph node " + graph.nodes[i] + " missing from normalized.jsonl");
    texts[i] = text::decode_utf8(it->second->norm_text);
  }
  const auto result = generate_oad_pairs(graph, texts, split, run.cfg().labeling, run.threads());
  run.output_text("oad_pairs.jsonl", joined_lines(result.pairs));
  run.finish(std::to_string(result.positives) + " positive and " + std::to_string(result.negatives) +
             " negative pairs, " + std::to_string(result.discarded_similar) + " discarded as too similar");
}

std::vector<std::vector<std::string>> cluster_locations(const RelatednessGraph& graph,
                                                        const std::vector<DuplicateCluster>& clusters,
                                                        const std::vector<AdRecord>& ads) {
  std::map<std::string_view, const AdRecord*> by_id;
  for (const auto& r : ads) by_id[r.ad_id] = &r;
  std::map<std::string_view, const DuplicateCluster*> by_canonical;
  for (const auto& c : clusters) by_canonical[c.canonical_id] = &c;
  std::vector<std::vector<std::string>> out(graph.nodes.size());
  for (std::size_t i = 0; i < graph.nodes.size(); ++i) {
    const auto c = by_canonical.find(graph.nodes[i]);
    if (c == by_canonical.end()) throw InputError("graph node " + graph.nodes[i] + " missing from clusters.jsonl");
    for (const auto& member : c->second->member_ids) {
      const auto r = by_id.find(member);
      if (r == by_id.end()) throw InputError("cluster member " + member + " missing from ads.jsonl");
      out[i].insert(out[i].end(), r->second->locations.begin(), r->second->locations.end());
    }
    std::sort(out[i].begin(), out[i].end());
    out[i].erase(std::unique(out[i].begin(), out[i].end()), out[i].end());
  }
  return out;
}

void stage_label_htrp(StageRun& run) {
  const auto graph = read_graph(run.require("graph.json"));
  const auto clusters = read_clusters_jsonl(run.require("clusters.jsonl"));
  const auto ads = read_ads(run.require("ads.jsonl"));
  const Gazetteer gaz = load_gazetteer(run);
  const auto locations = cluster_locations(graph, clusters, ads);
  const auto labels = label_htrp(graph, locations, gaz, run.cfg().labeling);
  run.output_text("htrp_labels.jsonl", joined_lines(labels));
  const auto positives = std::count_if(labels.begin(), labels.end(), [](const LabeledAd& a) { return a.label == 1; });
  run.finish(std::to_string(positives) + " of " + std::to_string(labels.size()) + " ads labeled positive");
}

void stage_compare(StageRun& run) {
  const auto baseline = read_labeled_ads_jsonl(run.require("htrp_labels.jsonl"));
  const auto graph = read_graph(run.require("graph.json"));
  const auto clusters = read_clusters_jsonl(run.require("clusters.jsonl"));
  const auto ads = read_ads(run.require("ads.jsonl"));
  const Gazetteer gaz = load_gazetteer(run);
  const auto locations = cluster_locations(graph, clusters, ads);
  const auto variant = label_htrp(graph, locations, gaz, run.cfg().variant_labeling());

  std::map<std::string, const AdRecord*, std::less<>> by_id;
  for (const auto& r : ads) by_id[r.ad_id] = &r;
  const StratumKey key = run.cfg().compare_strata;
  const auto stratum_of = [&](std::string_view ad_id) -> std::string {
    const auto it = by_id.find(ad_id);
    if (it == by_id.end()) return "unknown";
    const AdRecord& r = *it->second;
    switch (key) {
      case StratumKey::location:
        for (const auto& loc : r.locations) {
          if (auto name = gaz.canonical_name(loc)) return std::string(*name);
        }
        return "unresolved";
      case StratumKey::source: return r.source.empty() ? "unknown" : r.source;
      case StratumKey::month: return format_iso8601(r.posted_at).substr(0, 7);
    }
    return "unknown";
  };
  const auto cmp = compare_label_variants(baseline, variant, stratum_of);
  run.output_text("compare_report.json", comparison_to_json(cmp));
  run.out() << comparison_table(cmp);
  char buf[96];
  std::snprintf(buf, sizeof buf, "%zu strata, W = %.1f, p = %.6g%s", cmp.strata.size(), cmp.test.statistic,
                cmp.test.p_value, cmp.test.degenerate ? " (degenerate)" : "");
  run.finish(buf);
}

void stage_export(StageRun& run) {
  const auto graph = read_graph(run.require("graph.json"));
  const auto format = run.cfg().export_format;
  const std::string name = format == GraphFormat::dot ? "graph.dot" : "graph.graphml";
  const auto component = run.cfg().export_component;
  if (component && *component >= graph.components.size()) {
    throw ConfigError("export.component", "graph has " + std::to_string(graph.components.size()) + " components");
  }
  run.output_text(name, render_graph(graph, format, component));
  run.finish("wrote " + name);
}

void run_single(Stage stage, const PipelineConfig& cfg, const RunOptions& opts) {
  StageRun run(stage, cfg, opts);
  switch (stage) {
    case Stage::synth: return stage_synth(run);
    case Stage::ingest: return stage_ingest(run);
    case Stage::dedup: return stage_dedup(run);
    case Stage::extract: return stage_extract(run);
    case Stage::graph: return stage_graph(run);
    case Stage::stats: return stage_stats(run);
    case Stage::split: return stage_split(run);
    case Stage::label_oad: return stage_label_oad(run);
    case Stage::label_htrp: return stage_label_htrp(run);
    case Stage::compare: return stage_compare(run);
    case Stage::export_graph: return stage_export(run);
    case Stage::all: break;
  }
}

}  // namespace

void run_stage(Stage stage, const PipelineConfig& config, const RunOptions& opts) {
  PipelineConfig cfg = config;
  cfg.finalize();
  if (stage != Stage::all) {
    run_single(stage, cfg, opts);
    return;
  }
  const auto start = std::chrono::steady_clock::now();
  std::vector<Stage> chain;
  if (cfg.stage_synth) chain.push_back(Stage::synth);
  chain.insert(chain.end(), {Stage::ingest, Stage::dedup, Stage::extract, Stage::graph});
  if (cfg.stage_stats) chain.push_back(Stage::stats);
  chain.insert(chain.end(), {Stage::split, Stage::label_oad, Stage::label_htrp});
  if (cfg.stage_compare) chain.push_back(Stage::compare);
  if (cfg.stage_export) chain.push_back(Stage::export_graph);
  for (Stage s : chain) run_single(s, cfg, opts);
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f",
                std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count());
  (opts.log ? *opts.log : std::cerr) << "[adgraph] all: " << chain.size() << " stages (" << buf << " s)\n";
}

int run(std::string_view stage, const PipelineConfig& cfg, const RunOptions& opts) {
  std::ostream& log = opts.log ? *opts.log : std::cerr;
  const auto s = parse_stage(stage);
  if (!s) {
    log << "adgraph: unknown subcommand '" << stage << "'\n";
    return 2;
  }
  try {
    run_stage(*s, cfg, opts);
    return 0;
  } catch (const ConfigError& e) {
    log << "adgraph: " << e.what() << "\n";
    return 2;
  } catch (const StageDependencyError& e) {
    log << "adgraph: " << e.what() << "\n";
    return 3;
  } catch (const StaleInputError& e) {
    log << "adgraph: stale input: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    log << "adgraph: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace adgraph
