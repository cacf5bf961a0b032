#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "adgraph/timestamp.hpp"

namespace adgraph {

/// One raw ad as ingested from a corpus file.
struct AdRecord {
  std::string ad_id;
  std::string title;
  std::string description;
  UnixSeconds posted_at = 0;
  std::vector<std::string> locations;
  std::optional<std::string> declared_phone;
  std::string source;

  bool operator==(const AdRecord&) const = default;
};

/// Normalized view of an ad used by dedup and similarity. `original_text`
/// is title and description joined by one space, untouched otherwise.
struct NormalizedAd {
  std::string ad_id;
  std::string norm_text;
  std::string original_text;
  std::size_t emoji_count = 0;
  std::size_t char_length = 0;

  bool operator==(const NormalizedAd&) const = default;
};

enum class CorpusFormat { jsonl, csv };

/// A rejected input row. `line` is 1-based (the first line of a record for
/// CSV rows spanning several lines).
struct Reject {
  std::size_t line = 0;
  std::string reason;
};

struct IngestResult {
  std::vector<AdRecord> records;
  std::vector<Reject> rejects;
};

/// Fixed CSV header contract.
inline constexpr std::string_view kCsvHeader =
    "ad_id,title,description,posted_at,locations,declared_phone,source";

/// Reads a corpus file. Invalid rows are reported in `rejects`, never
/// silently dropped. Throws IoError when the file cannot be read and
/// EmptyCorpusError when no row is valid.
IngestResult ingest(const std::filesystem::path& path, CorpusFormat format);

/// Same as `ingest` for in-memory content (one JSONL object per line or a
/// CSV document with the header contract).
IngestResult ingest_text(std::string_view content, CorpusFormat format);

std::string original_text(const AdRecord& record);

/// Normalizes an ad: NFC, case folding, control characters stripped,
/// whitespace runs collapsed and trimmed. Emojis, digits and in-token
/// punctuation are kept verbatim.
NormalizedAd normalize(const AdRecord& record);

/// The text transform behind `normalize`, exposed for idempotence checks.
std::string normalize_text(std::string_view utf8);

std::vector<NormalizedAd> normalize_all(std::span<const AdRecord> records, unsigned threads = 1);

std::string to_jsonl(const AdRecord& record);
std::string to_jsonl(const NormalizedAd& ad);
std::string to_jsonl(const Reject& reject);

void write_records_jsonl(const std::filesystem::path& path, std::span<const AdRecord> records);
void write_normalized_jsonl(const std::filesystem::path& path, std::span<const NormalizedAd> ads);
void write_rejects_jsonl(const std::filesystem::path& path, std::span<const Reject> rejects);

/// Reads a normalized-ad JSONL artifact written by `write_normalized_jsonl`.
std::vector<NormalizedAd> read_normalized_jsonl(const std::filesystem::path& path);

std::optional<CorpusFormat> parse_corpus_format(std::string_view name);

}  // namespace adgraph
