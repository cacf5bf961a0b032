#include "adgraph/config.hpp"

#include <charconv>
#include <cmath>
#include <functional>
#include <sstream>
#include <thread>

#include "adgraph/error.hpp"
#include "adgraph/io.hpp"

namespace adgraph {

std::optional<StratumKey> parse_stratum_key(std::string_view name) {
  if (name == "location") return StratumKey::location;
  if (name == "source") return StratumKey::source;
  if (name == "month") return StratumKey::month;
  return std::nullopt;
}

std::string_view to_string(StratumKey k) {
  switch (k) {
    case StratumKey::location: return "location";
    case StratumKey::source: return "source";
    case StratumKey::month: return "month";
  }
  return "location";
}

namespace {

std::string_view trim(std::string_view s) {
  const auto ws = [](char c) { return c == ' ' || c == '\t' || c == '\r' || c == '\n'; };
  while (!s.empty() && ws(s.front())) s.remove_prefix(1);
  while (!s.empty() && ws(s.back())) s.remove_suffix(1);
  return s;
}

std::uint64_t to_u64(std::string_view key, std::string_view v) {
  std::uint64_t out = 0;
  int base = 10;
  if (v.starts_with("0x") || v.starts_with("0X")) {
    v.remove_prefix(2);
    base = 16;
  }
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out, base);
  if (v.empty() || ec != std::errc() || ptr != v.data() + v.size()) {
    throw ConfigError(std::string(key), "expected a non-negative integer, got '" + std::string(v) + "'");
  }
  return out;
}

double to_double(std::string_view key, std::string_view v) {
  const std::string s(v);
  std::size_t used = 0;
  double out = 0.0;
  try {
    out = std::stod(s, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (s.empty() || used != s.size() || !std::isfinite(out)) {
    throw ConfigError(std::string(key), "expected a number, got '" + s + "'");
  }
  return out;
}

bool to_bool(std::string_view key, std::string_view v) {
  if (v == "true" || v == "yes" || v == "1" || v == "on") return true;
  if (v == "false" || v == "no" || v == "0" || v == "off") return false;
  throw ConfigError(std::string(key), "expected true or false, got '" + std::string(v) + "'");
}

template <typename T, typename Parse>
T to_enum(std::string_view key, std::string_view v, Parse parse, std::string_view allowed) {
  if (auto e = parse(v)) return *e;
  throw ConfigError(std::string(key), "expected one of " + std::string(allowed) + ", got '" + std::string(v) + "'");
}

std::optional<RuleCombination> parse_rule(std::string_view v) {
  if (v == "or" || v == "any") return RuleCombination::any;
  if (v == "and" || v == "all") return RuleCombination::all;
  return std::nullopt;
}

std::optional<FeatureScope> parse_scope(std::string_view v) {
  if (v == "component") return FeatureScope::component;
  if (v == "ad") return FeatureScope::ad;
  return std::nullopt;
}

std::filesystem::path to_path(std::string_view v, const std::filesystem::path& base) {
  if (v.empty()) return {};
  std::filesystem::path p{std::string(v)};
  if (p.is_relative() && !base.empty()) p = base / p;
  return p.lexically_normal();
}

std::string fmt_double(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

template <typename T>
std::string opt_str(const std::optional<T>& v) {
  if (!v) return "";
  if constexpr (std::is_same_v<T, double>) {
    return fmt_double(*v);
  } else if constexpr (std::is_enum_v<T>) {
    return std::string(to_string(*v));
  } else {
    return std::to_string(*v);
  }
}

struct Field {
  std::string key;
  std::function<void(PipelineConfig&, std::string_view, const std::filesystem::path&)> set;
  std::function<std::string(const PipelineConfig&)> get;
  bool affects_outputs = true;
};

using P = const std::filesystem::path&;

const std::vector<Field>& fields() {
  static const std::vector<Field> table = [] {
    std::vector<Field> f;
    auto add = [&](std::string key, auto set, auto get, bool affects = true) {
      f.push_back({std::move(key), set, get, affects});
    };
    add("work_dir", [](PipelineConfig& c, std::string_view v, P b) { c.work_dir = to_path(v, b); },
        [](const PipelineConfig& c) { return c.work_dir.string(); }, false);
    add("input.path", [](PipelineConfig& c, std::string_view v, P b) { c.input_path = to_path(v, b); },
        [](const PipelineConfig& c) { return c.input_path.string(); }, false);
    add("input.format",
        [](PipelineConfig& c, std::string_view v, P) {
          c.input_format = to_enum<CorpusFormat>("input.format", v, parse_corpus_format, "jsonl, csv");
        },
        [](const PipelineConfig& c) { return std::string(c.input_format == CorpusFormat::csv ? "csv" : "jsonl"); });
    add("annotations.path", [](PipelineConfig& c, std::string_view v, P b) { c.annotations_path = to_path(v, b); },
        [](const PipelineConfig& c) { return c.annotations_path.string(); }, false);
    add("gazetteer.path", [](PipelineConfig& c, std::string_view v, P b) { c.gazetteer_path = to_path(v, b); },
        [](const PipelineConfig& c) { return c.gazetteer_path.string(); }, false);
    add("seed", [](PipelineConfig& c, std::string_view v, P) { c.seed = to_u64("seed", v); },
        [](const PipelineConfig& c) { return std::to_string(c.seed); });
    add("threads",
        [](PipelineConfig& c, std::string_view v, P) {
          const auto n = to_u64("threads", v);
          if (n > 1024) throw ConfigError("threads", "must be at most 1024");
          c.threads = static_cast<unsigned>(n);
        },
        [](const PipelineConfig& c) { return std::to_string(c.threads); }, false);

    add("similarity.shingle_k",
        [](PipelineConfig& c, std::string_view v, P) { c.similarity.shingle_k = to_u64("similarity.shingle_k", v); },
        [](const PipelineConfig& c) { return std::to_string(c.similarity.shingle_k); });
    add("similarity.num_signatures",
        [](PipelineConfig& c, std::string_view v, P) {
          c.similarity.num_signatures = to_u64("similarity.num_signatures", v);
        },
        [](const PipelineConfig& c) { return std::to_string(c.similarity.num_signatures); });
    add("similarity.bands",
        [](PipelineConfig& c, std::string_view v, P) { c.similarity.bands = to_u64("similarity.bands", v); },
        [](const PipelineConfig& c) { return std::to_string(c.similarity.bands); });
    add("similarity.dup_threshold",
        [](PipelineConfig& c, std::string_view v, P) {
          c.similarity.dup_threshold = to_double("similarity.dup_threshold", v);
        },
        [](const PipelineConfig& c) { return fmt_double(c.similarity.dup_threshold); });

    add("graph.quarantine",
        [](PipelineConfig& c, std::string_view v, P) { c.graph.quarantine = to_bool("graph.quarantine", v); },
        [](const PipelineConfig& c) { return std::string(c.graph.quarantine ? "true" : "false"); });
    add("graph.quarantine_cap",
        [](PipelineConfig& c, std::string_view v, P) { c.graph.quarantine_cap = to_u64("graph.quarantine_cap", v); },
        [](const PipelineConfig& c) { return std::to_string(c.graph.quarantine_cap); });

    add("labeling.pair_sim_threshold",
        [](PipelineConfig& c, std::string_view v, P) {
          c.labeling.pair_sim_threshold = to_double("labeling.pair_sim_threshold", v);
        },
        [](const PipelineConfig& c) { return fmt_double(c.labeling.pair_sim_threshold); });
    add("labeling.distance_threshold_miles",
        [](PipelineConfig& c, std::string_view v, P) {
          c.labeling.distance_threshold_miles = to_double("labeling.distance_threshold_miles", v);
        },
        [](const PipelineConfig& c) { return fmt_double(c.labeling.distance_threshold_miles); });
    add("labeling.phone_count_threshold",
        [](PipelineConfig& c, std::string_view v, P) {
          c.labeling.phone_count_threshold = to_u64("labeling.phone_count_threshold", v);
        },
        [](const PipelineConfig& c) { return std::to_string(c.labeling.phone_count_threshold); });
    add("labeling.rule_combination",
        [](PipelineConfig& c, std::string_view v, P) {
          c.labeling.rule_combination = to_enum<RuleCombination>("labeling.rule_combination", v, parse_rule, "or, and");
        },
        [](const PipelineConfig& c) { return std::string(to_string(c.labeling.rule_combination)); });
    add("labeling.split_ratio",
        [](PipelineConfig& c, std::string_view v, P) { c.labeling.split_ratio = to_double("labeling.split_ratio", v); },
        [](const PipelineConfig& c) { return fmt_double(c.labeling.split_ratio); });
    add("labeling.pairs_per_class",
        [](PipelineConfig& c, std::string_view v, P) {
          c.labeling.pairs_per_class = to_u64("labeling.pairs_per_class", v);
        },
        [](const PipelineConfig& c) { return std::to_string(c.labeling.pairs_per_class); });
    add("labeling.max_component_size_for_pairs",
        [](PipelineConfig& c, std::string_view v, P) {
          c.labeling.max_component_size_for_pairs = to_u64("labeling.max_component_size_for_pairs", v);
        },
        [](const PipelineConfig& c) { return std::to_string(c.labeling.max_component_size_for_pairs); });
    add("labeling.feature_scope",
        [](PipelineConfig& c, std::string_view v, P) {
          c.labeling.feature_scope = to_enum<FeatureScope>("labeling.feature_scope", v, parse_scope, "component, ad");
        },
        [](const PipelineConfig& c) { return std::string(to_string(c.labeling.feature_scope)); });

    add("compare.strata",
        [](PipelineConfig& c, std::string_view v, P) {
          c.compare_strata = to_enum<StratumKey>("compare.strata", v, parse_stratum_key, "location, source, month");
        },
        [](const PipelineConfig& c) { return std::string(to_string(c.compare_strata)); });
    add("compare.variant.distance_threshold_miles",
        [](PipelineConfig& c, std::string_view v, P) {
          c.compare_variant.distance_threshold_miles =
              v.empty() ? std::nullopt : std::optional(to_double("compare.variant.distance_threshold_miles", v));
        },
        [](const PipelineConfig& c) { return opt_str(c.compare_variant.distance_threshold_miles); });
    add("compare.variant.phone_count_threshold",
        [](PipelineConfig& c, std::string_view v, P) {
          c.compare_variant.phone_count_threshold =
              v.empty() ? std::nullopt
                        : std::optional<std::size_t>(to_u64("compare.variant.phone_count_threshold", v));
        },
        [](const PipelineConfig& c) { return opt_str(c.compare_variant.phone_count_threshold); });
    add("compare.variant.rule_combination",
        [](PipelineConfig& c, std::string_view v, P) {
          c.compare_variant.rule_combination =
              v.empty() ? std::nullopt
                        : std::optional(to_enum<RuleCombination>("compare.variant.rule_combination", v, parse_rule,
                                                                 "or, and"));
        },
        [](const PipelineConfig& c) { return opt_str(c.compare_variant.rule_combination); });
    add("compare.variant.feature_scope",
        [](PipelineConfig& c, std::string_view v, P) {
          c.compare_variant.feature_scope =
              v.empty() ? std::nullopt
                        : std::optional(to_enum<FeatureScope>("compare.variant.feature_scope", v, parse_scope,
                                                              "component, ad"));
        },
        [](const PipelineConfig& c) { return opt_str(c.compare_variant.feature_scope); });

    add("export.format",
        [](PipelineConfig& c, std::string_view v, P) {
          c.export_format = to_enum<GraphFormat>("export.format", v, parse_graph_format, "graphml, dot");
        },
        [](const PipelineConfig& c) {
          return std::string(c.export_format == GraphFormat::dot ? "dot" : "graphml");
        });
    add("export.component",
        [](PipelineConfig& c, std::string_view v, P) {
          if (v.empty() || v == "all") {
            c.export_component.reset();
            return;
          }
          const auto n = to_u64("export.component", v);
          if (n > UINT32_MAX) throw ConfigError("export.component", "component id out of range");
          c.export_component = static_cast<std::uint32_t>(n);
        },
        [](const PipelineConfig& c) { return c.export_component ? std::to_string(*c.export_component) : "all"; });

    add("synth.n_ads", [](PipelineConfig& c, std::string_view v, P) { c.synth.n_ads = to_u64("synth.n_ads", v); },
        [](const PipelineConfig& c) { return std::to_string(c.synth.n_ads); });
    add("synth.dup_rate",
        [](PipelineConfig& c, std::string_view v, P) { c.synth.dup_rate = to_double("synth.dup_rate", v); },
        [](const PipelineConfig& c) { return fmt_double(c.synth.dup_rate); });
    add("synth.n_components",
        [](PipelineConfig& c, std::string_view v, P) { c.synth.n_components = to_u64("synth.n_components", v); },
        [](const PipelineConfig& c) { return std::to_string(c.synth.n_components); });
    add("synth.sizes",
        [](PipelineConfig& c, std::string_view v, P) {
          c.synth.sizes =
              to_enum<SizeDistribution>("synth.sizes", v, parse_size_distribution, "singletons, heavy_tailed");
        },
        [](const PipelineConfig& c) { return std::string(to_string(c.synth.sizes)); });
    add("synth.obfuscation_rate",
        [](PipelineConfig& c, std::string_view v, P) {
          c.synth.obfuscation_rate = to_double("synth.obfuscation_rate", v);
        },
        [](const PipelineConfig& c) { return fmt_double(c.synth.obfuscation_rate); });
    add("synth.near_dup_fraction",
        [](PipelineConfig& c, std::string_view v, P) {
          c.synth.near_dup_fraction = to_double("synth.near_dup_fraction", v);
        },
        [](const PipelineConfig& c) { return fmt_double(c.synth.near_dup_fraction); });
    add("synth.far_span_fraction",
        [](PipelineConfig& c, std::string_view v, P) {
          c.synth.far_span_fraction = to_double("synth.far_span_fraction", v);
        },
        [](const PipelineConfig& c) { return fmt_double(c.synth.far_span_fraction); });
    add("synth.output_dir", [](PipelineConfig& c, std::string_view v, P b) { c.synth_output_dir = to_path(v, b); },
        [](const PipelineConfig& c) { return c.synth_output_dir.string(); }, false);

    add("stages.synth", [](PipelineConfig& c, std::string_view v, P) { c.stage_synth = to_bool("stages.synth", v); },
        [](const PipelineConfig& c) { return std::string(c.stage_synth ? "true" : "false"); }, false);
    add("stages.stats", [](PipelineConfig& c, std::string_view v, P) { c.stage_stats = to_bool("stages.stats", v); },
        [](const PipelineConfig& c) { return std::string(c.stage_stats ? "true" : "false"); }, false);
    add("stages.compare",
        [](PipelineConfig& c, std::string_view v, P) { c.stage_compare = to_bool("stages.compare", v); },
        [](const PipelineConfig& c) { return std::string(c.stage_compare ? "true" : "false"); }, false);
    add("stages.export",
        [](PipelineConfig& c, std::string_view v, P) { c.stage_export = to_bool("stages.export", v); },
        [](const PipelineConfig& c) { return std::string(c.stage_export ? "true" : "false"); }, false);
    return f;
  }();
  return table;
}

}  // namespace

void PipelineConfig::set(std::string_view key, std::string_view value, const std::filesystem::path& base_dir) {
  key = trim(key);
  value = trim(value);
  for (const auto& f : fields()) {
    if (f.key == key) {
      f.set(*this, value, base_dir);
      return;
    }
  }
  throw ConfigError(std::string(key), "unknown key");
}

void PipelineConfig::finalize() {
  similarity.seed = seed;
  labeling.seed = seed;
  synth.seed = seed;
  similarity.validate();
  labeling.validate();
  variant_labeling().validate();
  if (stage_synth) synth.validate();
}

unsigned PipelineConfig::effective_threads() const {
  if (threads > 0) return threads;
  return std::max(1u, std::thread::hardware_concurrency());
}

std::filesystem::path PipelineConfig::synth_dir() const {
  return synth_output_dir.empty() ? work_dir / "synth" : synth_output_dir;
}

std::filesystem::path PipelineConfig::corpus_path() const {
  if (!input_path.empty()) return input_path;
  if (stage_synth) return synth_dir() / "corpus.jsonl";
  return {};
}

LabelingConfig PipelineConfig::variant_labeling() const {
  LabelingConfig v = labeling;
  if (compare_variant.distance_threshold_miles) v.distance_threshold_miles = *compare_variant.distance_threshold_miles;
  if (compare_variant.phone_count_threshold) v.phone_count_threshold = *compare_variant.phone_count_threshold;
  if (compare_variant.rule_combination) v.rule_combination = *compare_variant.rule_combination;
  if (compare_variant.feature_scope) v.feature_scope = *compare_variant.feature_scope;
  return v;
}

std::string PipelineConfig::canonical_text() const {
  std::string out;
  for (const auto& f : fields()) {
    if (!f.affects_outputs) continue;
    out += f.key + " = " + f.get(*this) + "\n";
  }
  return out;
}

const std::vector<std::string>& PipelineConfig::keys() {
  static const std::vector<std::string> k = [] {
    std::vector<std::string> out;
    for (const auto& f : fields()) out.push_back(f.key);
    return out;
  }();
  return k;
}

PipelineConfig parse_config(std::string_view content, const std::filesystem::path& base_dir) {
  PipelineConfig cfg;
  io::for_each_line(content, [&](std::string_view line, std::size_t line_no) {
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) return;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigError("line " + std::to_string(line_no), "expected 'key = value'");
    }
    cfg.set(line.substr(0, eq), line.substr(eq + 1), base_dir);
  });
  return cfg;
}

PipelineConfig load_config(const std::filesystem::path& path) {
  return parse_config(io::read_file(path), path.parent_path());
}

void apply_overrides(PipelineConfig& cfg, const std::vector<std::string>& assignments) {
  for (const auto& a : assignments) {
    const auto eq = a.find('=');
    if (eq == std::string::npos) throw ConfigError(a, "override must be key=value");
    cfg.set(std::string_view(a).substr(0, eq), std::string_view(a).substr(eq + 1));
  }
}

}  // namespace adgraph
