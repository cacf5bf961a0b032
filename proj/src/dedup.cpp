#include "adgraph/dedup.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <unordered_map>

#include <json.hpp>

#include "adgraph/error.hpp"
#include "adgraph/hashing.hpp"
#include "adgraph/io.hpp"
#include "adgraph/parallel.hpp"
#include "adgraph/unicode.hpp"
#include "adgraph/union_find.hpp"

namespace adgraph {

std::size_t levenshtein(std::u32string_view a, std::u32string_view b) {
  if (a.size() > b.size()) std::swap(a, b);
  if (a.empty()) return b.size();
  // Single row over the shorter string.
  std::vector<std::size_t> row(a.size() + 1);
  for (std::size_t i = 0; i <= a.size(); ++i) row[i] = i;
  for (std::size_t j = 1; j <= b.size(); ++j) {
    std::size_t diag = row[0];
    row[0] = j;
    for (std::size_t i = 1; i <= a.size(); ++i) {
      const std::size_t up = row[i];
      const std::size_t sub = diag + (a[i - 1] == b[j - 1] ? 0 : 1);
      row[i] = std::min({up + 1, row[i - 1] + 1, sub});
      diag = up;
    }
  }
  return row[a.size()];
}

std::size_t levenshtein(std::string_view a, std::string_view b) {
  return levenshtein(text::decode_utf8(a), text::decode_utf8(b));
}

std::size_t levenshtein_bounded(std::u32string_view a, std::u32string_view b,
                                std::size_t max_distance) {
  if (a.size() > b.size()) std::swap(a, b);
  const std::size_t m = a.size();
  const std::size_t n = b.size();
  const std::size_t k = max_distance;
  if (n - m > k) return k + 1;
  if (m == 0) return n;

  constexpr std::size_t kInf = std::numeric_limits<std::size_t>::max() / 2;
  // Rows are indexed by positions in the longer string; only the diagonal
  // band |i - j| <= k is evaluated.
  std::vector<std::size_t> prev(n + 1, kInf), cur(n + 1, kInf);
  for (std::size_t j = 0; j <= std::min(n, k); ++j) prev[j] = j;
  for (std::size_t i = 1; i <= m; ++i) {
    const std::size_t lo = i > k ? i - k : 1;
    const std::size_t hi = std::min(n, i + k);
    cur[lo - 1] = lo == 1 ? i : kInf;
    std::size_t row_min = cur[lo - 1];
    for (std::size_t j = lo; j <= hi; ++j) {
      const std::size_t sub = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
      const std::size_t v = std::min({prev[j] + 1, cur[j - 1] + 1, sub});
      cur[j] = v;
      row_min = std::min(row_min, v);
    }
    if (hi + 1 <= n) cur[hi + 1] = kInf;
    if (row_min > k) return k + 1;
    std::swap(prev, cur);
  }
  return std::min(prev[n], k + 1);
}

double similarity(std::u32string_view a, std::u32string_view b) {
  const std::size_t longest = std::max(a.size(), b.size());
  if (longest == 0) return 1.0;
  return 1.0 - static_cast<double>(levenshtein(a, b)) / static_cast<double>(longest);
}

double similarity(std::string_view a, std::string_view b) {
  return similarity(text::decode_utf8(a), text::decode_utf8(b));
}

bool similarity_at_least(std::u32string_view a, std::u32string_view b, double threshold) {
  const std::size_t longest = std::max(a.size(), b.size());
  if (longest == 0) return 1.0 >= threshold;
  const double slack = std::max(0.0, 1.0 - threshold) * static_cast<double>(longest);
  const auto bound = static_cast<std::size_t>(std::ceil(slack)) + 1;
  const std::size_t d = levenshtein_bounded(a, b, bound);
  if (d > bound) return false;
  return 1.0 - static_cast<double>(d) / static_cast<double>(longest) >= threshold;
}

void SimilarityConfig::validate() const {
  if (shingle_k == 0) throw ConfigError("similarity.shingle_k", "must be a positive integer");
  if (num_signatures == 0) {
    throw ConfigError("similarity.num_signatures", "must be a positive integer");
  }
  if (bands == 0) throw ConfigError("similarity.bands", "must be a positive integer");
  if (num_signatures % bands != 0) {
    throw ConfigError("similarity.bands", "num_signatures must be divisible by bands");
  }
  if (!(dup_threshold > 0.0 && dup_threshold <= 1.0)) {
    throw ConfigError("similarity.dup_threshold", "must be in (0, 1]");
  }
}

std::vector<std::uint64_t> shingle_hashes(std::u32string_view text, std::size_t k) {
  std::vector<std::uint64_t> out;
  if (k == 0 || text.size() < k) return out;
  out.reserve(text.size() - k + 1);
  for (std::size_t i = 0; i + k <= text.size(); ++i) {
    out.push_back(mix64(fnv1a64(text.substr(i, k))));
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

namespace {

std::vector<std::uint64_t> signature_seeds(const SimilarityConfig& cfg) {
  std::vector<std::uint64_t> seeds(cfg.num_signatures);
  for (std::size_t i = 0; i < seeds.size(); ++i) seeds[i] = mix64(cfg.seed + 0x1000193ULL * (i + 1));
  return seeds;
}

std::vector<std::uint64_t> signature_with(std::u32string_view text, std::size_t k,
                                          std::span<const std::uint64_t> seeds) {
  const auto shingles = shingle_hashes(text, k);
  if (shingles.empty()) return {};
  std::vector<std::uint64_t> sig(seeds.size(), std::numeric_limits<std::uint64_t>::max());
  for (std::uint64_t h : shingles) {
    for (std::size_t i = 0; i < seeds.size(); ++i) {
      const std::uint64_t v = mix64(h ^ seeds[i]);
      if (v < sig[i]) sig[i] = v;
    }
  }
  return sig;
}

void emit_group_pairs(std::span<const std::uint32_t> group, std::vector<std::uint64_t>& out) {
  for (std::size_t x = 0; x < group.size(); ++x) {
    for (std::size_t y = x + 1; y < group.size(); ++y) {
      std::uint32_t i = group[x], j = group[y];
      if (i > j) std::swap(i, j);
      out.push_back((static_cast<std::uint64_t>(i) << 32) | j);
    }
  }
}

// Sorts (key, index) entries and emits every pair sharing a key.
void pairs_from_keys(std::vector<std::pair<std::uint64_t, std::uint32_t>>& keyed,
                     std::vector<std::uint64_t>& out) {
  std::sort(keyed.begin(), keyed.end());
  std::vector<std::uint32_t> group;
  for (std::size_t s = 0; s < keyed.size();) {
    std::size_t e = s;
    group.clear();
    while (e < keyed.size() && keyed[e].first == keyed[s].first) group.push_back(keyed[e++].second);
    if (group.size() > 1) emit_group_pairs(group, out);
    s = e;
  }
}

}  // namespace

std::vector<std::uint64_t> minhash_signature(std::u32string_view text,
                                             const SimilarityConfig& cfg) {
  const auto seeds = signature_seeds(cfg);
  return signature_with(text, cfg.shingle_k, seeds);
}

std::vector<IndexPair> candidate_index_pairs(std::span<const std::u32string> texts,
                                             const SimilarityConfig& cfg, unsigned threads) {
  cfg.validate();
  const auto seeds = signature_seeds(cfg);
  std::vector<std::vector<std::uint64_t>> sigs(texts.size());
  parallel_for(texts.size(), threads,
               [&](std::size_t i) { sigs[i] = signature_with(texts[i], cfg.shingle_k, seeds); });

  std::vector<std::uint64_t> packed;

  // Short texts: exact-match hashing only.
  {
    std::vector<std::pair<std::uint64_t, std::uint32_t>> keyed;
    for (std::size_t i = 0; i < texts.size(); ++i) {
      if (sigs[i].empty()) keyed.emplace_back(fnv1a64(texts[i]), static_cast<std::uint32_t>(i));
    }
    std::vector<std::uint64_t> short_pairs;
    pairs_from_keys(keyed, short_pairs);
    for (std::uint64_t p : short_pairs) {
      if (texts[p >> 32] == texts[p & 0xFFFFFFFFu]) packed.push_back(p);
    }
  }

  const std::size_t rows = cfg.num_signatures / cfg.bands;
  std::vector<std::pair<std::uint64_t, std::uint32_t>> keyed;
  keyed.reserve(texts.size());
  for (std::size_t band = 0; band < cfg.bands; ++band) {
    keyed.clear();
    for (std::size_t i = 0; i < texts.size(); ++i) {
      if (sigs[i].empty()) continue;
      std::uint64_t h = mix64(band + 1);
      for (std::size_t r = 0; r < rows; ++r) h = mix64(h ^ sigs[i][band * rows + r]);
      keyed.emplace_back(h, static_cast<std::uint32_t>(i));
    }
    pairs_from_keys(keyed, packed);
  }

  std::sort(packed.begin(), packed.end());
  packed.erase(std::unique(packed.begin(), packed.end()), packed.end());
  std::vector<IndexPair> out;
  out.reserve(packed.size());
  for (std::uint64_t p : packed) {
    out.emplace_back(static_cast<std::uint32_t>(p >> 32), static_cast<std::uint32_t>(p));
  }
  return out;
}

std::vector<std::pair<std::string, std::string>> candidate_pairs(
    std::span<const NormalizedAd> corpus, const SimilarityConfig& cfg, unsigned threads) {
  std::vector<std::u32string> texts;
  texts.reserve(corpus.size());
  for (const auto& ad : corpus) texts.push_back(text::decode_utf8(ad.norm_text));
  std::vector<std::pair<std::string, std::string>> out;
  for (auto [i, j] : candidate_index_pairs(texts, cfg, threads)) {
    const auto& a = corpus[i].ad_id;
    const auto& b = corpus[j].ad_id;
    out.emplace_back(std::min(a, b), std::max(a, b));
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::string_view to_string(DedupMethod m) { return m == DedupMethod::exact ? "exact" : "near"; }

std::vector<DuplicateCluster> deduplicate(std::span<const AdRecord> records,
                                          std::span<const NormalizedAd> normalized,
                                          const SimilarityConfig& cfg, unsigned threads) {
  cfg.validate();
  if (records.size() != normalized.size()) {
    throw InputError("deduplicate: records and normalized ads differ in length");
  }
  for (std::size_t i = 0; i < records.size(); ++i) {
    if (records[i].ad_id != normalized[i].ad_id) {
      throw InputError("deduplicate: records and normalized ads are not aligned at " +
                       records[i].ad_id);
    }
  }

  // Exact grouping by normalized text.
  std::unordered_map<std::string_view, std::uint32_t> group_of_text;
  std::vector<std::uint32_t> group_of_ad(records.size());
  std::vector<std::u32string> group_texts;
  for (std::size_t i = 0; i < normalized.size(); ++i) {
    auto [it, inserted] = group_of_text.try_emplace(normalized[i].norm_text,
                                                    static_cast<std::uint32_t>(group_texts.size()));
    if (inserted) group_texts.push_back(text::decode_utf8(normalized[i].norm_text));
    group_of_ad[i] = it->second;
  }

  // Near-duplicate merging over group texts.
  const auto candidates = candidate_index_pairs(group_texts, cfg, threads);
  std::vector<char> verified(candidates.size(), 0);
  parallel_for(candidates.size(), threads, [&](std::size_t p) {
    const auto [i, j] = candidates[p];
    verified[p] = similarity_at_least(group_texts[i], group_texts[j], cfg.dup_threshold) ? 1 : 0;
  });
  UnionFind uf(group_texts.size());
  for (std::size_t p = 0; p < candidates.size(); ++p) {
    if (verified[p]) uf.unite(candidates[p].first, candidates[p].second);
  }

  std::unordered_map<std::uint32_t, std::size_t> cluster_of_root;
  std::vector<std::vector<std::size_t>> members;
  for (std::size_t i = 0; i < records.size(); ++i) {
    const std::uint32_t root = uf.find(group_of_ad[i]);
    auto [it, inserted] = cluster_of_root.try_emplace(root, members.size());
    if (inserted) members.emplace_back();
    members[it->second].push_back(i);
  }

  std::vector<DuplicateCluster> clusters;
  clusters.reserve(members.size());
  for (const auto& ids : members) {
    DuplicateCluster c;
    std::size_t best = ids.front();
    bool multiple_groups = false;
    for (std::size_t i : ids) {
      const auto& r = records[i];
      const auto& b = records[best];
      if (r.posted_at < b.posted_at || (r.posted_at == b.posted_at && r.ad_id < b.ad_id)) best = i;
      if (group_of_ad[i] != group_of_ad[ids.front()]) multiple_groups = true;
      c.member_ids.push_back(r.ad_id);
    }
    c.canonical_id = records[best].ad_id;
    std::sort(c.member_ids.begin(), c.member_ids.end());
    c.method = multiple_groups ? DedupMethod::near : DedupMethod::exact;
    clusters.push_back(std::move(c));
  }
  std::sort(clusters.begin(), clusters.end(),
            [](const auto& x, const auto& y) { return x.canonical_id < y.canonical_id; });
  return clusters;
}

std::string to_jsonl(const DuplicateCluster& c) {
  nlohmann::ordered_json j;
  j["canonical_id"] = c.canonical_id;
  j["member_ids"] = c.member_ids;
  j["method"] = to_string(c.method);
  return j.dump(-1, ' ', false, nlohmann::json::error_handler_t::replace);
}

void write_clusters_jsonl(const std::filesystem::path& path,
                          std::span<const DuplicateCluster> clusters) {
  std::string out;
  for (const auto& c : clusters) {
    out += to_jsonl(c);
    out += '\n';
  }
  io::write_file(path, out);
}

std::vector<DuplicateCluster> read_clusters_jsonl(const std::filesystem::path& path) {
  const std::string content = io::read_file(path);
  std::vector<DuplicateCluster> out;
  io::for_each_line(content, [&](std::string_view line, std::size_t line_no) {
    if (line.empty()) return;
    try {
      const auto j = nlohmann::json::parse(line);
      DuplicateCluster c;
      c.canonical_id = j.at("canonical_id").get<std::string>();
      c.member_ids = j.at("member_ids").get<std::vector<std::string>>();
      const auto method = j.at("method").get<std::string>();
      if (method != "exact" && method != "near") throw InputError("unknown method " + method);
      c.method = method == "exact" ? DedupMethod::exact : DedupMethod::near;
      out.push_back(std::move(c));
    } catch (const nlohmann::json::exception& e) {
      throw InputError(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
  });
  return out;
}

}  // namespace adgraph
