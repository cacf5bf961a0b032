#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "adgraph/corpus.hpp"

namespace adgraph {

enum class IdentifierKind { phone, email, social_handle, url };

std::string_view to_string(IdentifierKind kind);
std::optional<IdentifierKind> parse_identifier_kind(std::string_view name);

/// Half-open codepoint range into an ad's original_text.
struct Span {
  std::size_t start = 0;
  std::size_t end = 0;
  bool operator==(const Span&) const = default;
};

/// A normalized hard identifier. Identifiers taken from the declared_phone
/// field rather than the text carry the empty span {0, 0}.
struct Identifier {
  IdentifierKind kind = IdentifierKind::phone;
  Span raw_span;
  std::string raw;
  std::string canonical;

  /// "kind:canonical", the key used for graph edges.
  std::string key() const;
  bool operator==(const Identifier&) const = default;
};

struct PhoneMatch {
  std::string canonical;
  Span span;
  bool operator==(const PhoneMatch&) const = default;
};

/// Finds phone numbers written with separators, emojis or spelled-out
/// digits. Spans are codepoint offsets into `text`.
std::vector<PhoneMatch> deobfuscate_phone(std::u32string_view text);
std::vector<PhoneMatch> deobfuscate_phone(std::string_view utf8);

/// Digits-only phone canonical form: 10-15 digits, a leading 1 dropped
/// from 11-digit numbers. `digits` must be ASCII digits.
std::optional<std::string> canonical_phone_digits(std::string_view digits);

/// Maps platform aliases (snap, ig, wa, tg, ...) to a platform name,
/// ignoring ASCII case.
std::optional<std::string_view> social_platform(std::string_view keyword);

/// Canonical form of a raw identifier string. `context` is text preceding
/// the raw span; it supplies the platform for bare social handles.
/// Idempotent on canonical forms.
std::optional<std::string> canonicalize(IdentifierKind kind, std::string_view raw,
                                        std::string_view context = {});

/// Rule-based identifier extraction over original_text plus the
/// declared_phone field. Results are unique by (kind, canonical), ordered
/// by span start.
std::vector<Identifier> extract_identifiers(const AdRecord& record, const NormalizedAd& ad);

/// Union by (kind, canonical); the first occurrence's span is kept.
std::vector<Identifier> merge_identifiers(std::span<const Identifier> a,
                                          std::span<const Identifier> b);

struct AnnotationReject {
  std::size_t line = 0;
  std::string ad_id;
  std::string reason;
};

struct AnnotationImport {
  std::map<std::string, std::vector<Identifier>> by_ad;
  std::vector<AnnotationReject> rejects;
};

/// Imports externally produced entity spans (JSONL {ad_id, spans:[{start,
/// end, label}]}, codepoint offsets). Bad records and spans are rejected
/// individually.
AnnotationImport import_annotations(const std::filesystem::path& path,
                                    std::span<const NormalizedAd> corpus);
AnnotationImport import_annotations_text(std::string_view content,
                                         std::span<const NormalizedAd> corpus);

using IdentifierTable = std::map<std::string, std::vector<Identifier>>;

std::string to_jsonl(const std::string& ad_id, const Identifier& id);
void write_identifiers_jsonl(const std::filesystem::path& path, const IdentifierTable& table);
IdentifierTable read_identifiers_jsonl(const std::filesystem::path& path);
void write_annotation_rejects_jsonl(const std::filesystem::path& path,
                                    std::span<const AnnotationReject> rejects);

}  // namespace adgraph
