#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "adgraph/corpus.hpp"

namespace adgraph {

/// Unit-cost edit distance over Unicode codepoints.
std::size_t levenshtein(std::u32string_view a, std::u32string_view b);
std::size_t levenshtein(std::string_view a, std::string_view b);

/// Edit distance if it is at most `max_distance`, otherwise any value
/// greater than `max_distance`. Runs in O(max_distance * min(|a|,|b|)).
std::size_t levenshtein_bounded(std::u32string_view a, std::u32string_view b,
                                std::size_t max_distance);

/// 1 - levenshtein / max length; 1 when both are empty.
double similarity(std::u32string_view a, std::u32string_view b);
double similarity(std::string_view a, std::string_view b);

/// Equivalent to `similarity(a, b) >= threshold` without computing the
/// full distance table.
bool similarity_at_least(std::u32string_view a, std::u32string_view b, double threshold);

struct SimilarityConfig {
  std::size_t shingle_k = 5;
  std::size_t num_signatures = 128;
  std::size_t bands = 32;
  double dup_threshold = 0.9;
  std::uint64_t seed = 0x5eed5eedULL;

  /// Throws ConfigError when an invariant is violated.
  void validate() const;
};

/// Hashed character k-grams of `text`, sorted and unique.
std::vector<std::uint64_t> shingle_hashes(std::u32string_view text, std::size_t k);

/// Min-hash signature of a text's shingle set. Empty for texts shorter
/// than k.
std::vector<std::uint64_t> minhash_signature(std::u32string_view text,
                                             const SimilarityConfig& cfg);

using IndexPair = std::pair<std::uint32_t, std::uint32_t>;

/// Candidate pairs (i < j) over `texts` via banded min-hash collisions.
/// Texts shorter than k collide only with identical texts.
std::vector<IndexPair> candidate_index_pairs(std::span<const std::u32string> texts,
                                             const SimilarityConfig& cfg, unsigned threads = 1);

/// Candidate pairs by ad id, each pair ordered (smaller id first), sorted.
std::vector<std::pair<std::string, std::string>> candidate_pairs(
    std::span<const NormalizedAd> corpus, const SimilarityConfig& cfg, unsigned threads = 1);

enum class DedupMethod { exact, near };
std::string_view to_string(DedupMethod m);

struct DuplicateCluster {
  std::string canonical_id;
  std::vector<std::string> member_ids;  // sorted
  DedupMethod method = DedupMethod::exact;

  bool operator==(const DuplicateCluster&) const = default;
};

/// Groups exact duplicates of norm_text, then merges groups whose texts
/// are candidate pairs with similarity >= dup_threshold (transitively).
/// The canonical member has the earliest posted_at, then the smallest
/// ad_id. Output is sorted by canonical_id. `records` and `normalized`
/// must describe the same ads in the same order.
std::vector<DuplicateCluster> deduplicate(std::span<const AdRecord> records,
                                          std::span<const NormalizedAd> normalized,
                                          const SimilarityConfig& cfg, unsigned threads = 1);

std::string to_jsonl(const DuplicateCluster& c);
void write_clusters_jsonl(const std::filesystem::path& path,
                          std::span<const DuplicateCluster> clusters);
std::vector<DuplicateCluster> read_clusters_jsonl(const std::filesystem::path& path);

}  // namespace adgraph
