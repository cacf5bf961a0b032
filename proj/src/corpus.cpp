#include "adgraph/corpus.hpp"

#include <unordered_set>

#include <json.hpp>

#include "adgraph/error.hpp"
#include "adgraph/io.hpp"
#include "adgraph/parallel.hpp"
#include "adgraph/unicode.hpp"

namespace adgraph {

using json = nlohmann::json;
using ordered_json = nlohmann::ordered_json;

namespace {

// Field validation shared by the JSONL and CSV readers. Returns a reject
// reason, or an empty string when the record is valid.
std::string validate(const AdRecord& r) {
  if (r.ad_id.empty()) return "missing ad_id";
  if (r.title.empty() && r.description.empty()) return "empty title and description";
  return {};
}

std::string_view trim(std::string_view s) {
  const auto is_space = [](char c) { return c == ' ' || c == '\t' || c == '\r' || c == '\n'; };
  while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
  while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
  return s;
}

// Returns a reject reason or empty on success.
std::string record_from_json(const json& obj, AdRecord& out) {
  if (!obj.is_object()) return "not a JSON object";

  auto id = obj.find("ad_id");
  if (id == obj.end() || !id->is_string() || id->get_ref<const std::string&>().empty()) {
    return "missing ad_id";
  }
  out.ad_id = id->get<std::string>();

  for (auto [name, field] : {std::pair{"title", &out.title},
                             std::pair{"description", &out.description},
                             std::pair{"source", &out.source}}) {
    auto it = obj.find(name);
    if (it == obj.end() || it->is_null()) continue;
    if (!it->is_string()) return std::string("invalid ") + name;
    *field = it->get<std::string>();
  }

  auto posted = obj.find("posted_at");
  if (posted == obj.end() || posted->is_null()) return "missing posted_at";
  if (!posted->is_string()) return "invalid posted_at";
  auto ts = parse_iso8601(posted->get_ref<const std::string&>());
  if (!ts) return "invalid posted_at";
  out.posted_at = *ts;

  if (auto it = obj.find("locations"); it != obj.end() && !it->is_null()) {
    if (!it->is_array()) return "invalid locations";
    for (const auto& loc : *it) {
      if (!loc.is_string()) return "invalid locations";
      out.locations.push_back(loc.get<std::string>());
    }
  }

  if (auto it = obj.find("declared_phone"); it != obj.end() && !it->is_null()) {
    if (!it->is_string()) return "invalid declared_phone";
    out.declared_phone = it->get<std::string>();
  }
  return validate(out);
}

struct CsvRow {
  std::size_t line = 0;
  std::vector<std::string> cells;
  bool malformed = false;
};

// RFC 4180 reader: quoted cells may contain separators, doubled quotes and
// newlines.
std::vector<CsvRow> parse_csv(std::string_view content) {
  std::vector<CsvRow> rows;
  std::size_t line = 1;
  std::size_t i = 0;
  const std::size_t n = content.size();
  while (i < n) {
    CsvRow row;
    row.line = line;
    std::string cell;
    bool in_quotes = false;
    bool row_done = false;
    while (i < n && !row_done) {
      const char c = content[i];
      if (in_quotes) {
        if (c == '"') {
          if (i + 1 < n && content[i + 1] == '"') {
            cell.push_back('"');
            i += 2;
            continue;
          }
          in_quotes = false;
          ++i;
          continue;
        }
        if (c == '\n') ++line;
        cell.push_back(c);
        ++i;
        continue;
      }
      switch (c) {
        case '"':
          if (!cell.empty()) row.malformed = true;
          in_quotes = true;
          break;
        case ',':
          row.cells.push_back(std::move(cell));
          cell.clear();
          break;
        case '\r':
          break;
        case '\n':
          ++line;
          row_done = true;
          break;
        default:
          cell.push_back(c);
      }
      ++i;
    }
    if (in_quotes) row.malformed = true;
    row.cells.push_back(std::move(cell));
    if (row.cells.size() == 1 && row.cells[0].empty() && !row.malformed) continue;
    rows.push_back(std::move(row));
  }
  return rows;
}

std::string record_from_csv(const CsvRow& row, AdRecord& out) {
  if (row.malformed) return "malformed quoting";
  if (row.cells.size() != 7) return "expected 7 columns";
  const auto& c = row.cells;
  out.ad_id = std::string(trim(c[0]));
  if (out.ad_id.empty()) return "missing ad_id";
  out.title = c[1];
  out.description = c[2];
  const auto posted = trim(c[3]);
  if (posted.empty()) return "missing posted_at";
  auto ts = parse_iso8601(posted);
  if (!ts) return "invalid posted_at";
  out.posted_at = *ts;
  std::string_view locs = c[4];
  while (!locs.empty()) {
    const auto semi = locs.find(';');
    const auto part = trim(locs.substr(0, semi));
    if (!part.empty()) out.locations.emplace_back(part);
    if (semi == std::string_view::npos) break;
    locs.remove_prefix(semi + 1);
  }
  if (const auto phone = trim(c[5]); !phone.empty()) out.declared_phone = std::string(phone);
  out.source = std::string(trim(c[6]));
  return validate(out);
}

void accept(IngestResult& result, std::unordered_set<std::string>& seen, AdRecord&& record,
            std::size_t line) {
  if (!seen.insert(record.ad_id).second) {
    result.rejects.push_back({line, "duplicate ad_id"});
    return;
  }
  result.records.push_back(std::move(record));
}

}  // namespace

std::optional<CorpusFormat> parse_corpus_format(std::string_view name) {
  if (name == "jsonl") return CorpusFormat::jsonl;
  if (name == "csv") return CorpusFormat::csv;
  return std::nullopt;
}

IngestResult ingest_text(std::string_view content, CorpusFormat format) {
  IngestResult result;
  std::unordered_set<std::string> seen;

  if (format == CorpusFormat::jsonl) {
    io::for_each_line(content, [&](std::string_view line, std::size_t line_no) {
      if (trim(line).empty()) return;
      json obj = json::parse(line, nullptr, /*allow_exceptions=*/false);
      if (obj.is_discarded()) {
        result.rejects.push_back({line_no, "invalid JSON"});
        return;
      }
      AdRecord record;
      if (auto reason = record_from_json(obj, record); !reason.empty()) {
        result.rejects.push_back({line_no, std::move(reason)});
        return;
      }
      accept(result, seen, std::move(record), line_no);
    });
  } else {
    if (content.starts_with("\xEF\xBB\xBF")) content.remove_prefix(3);
    auto rows = parse_csv(content);
    if (rows.empty()) throw EmptyCorpusError("CSV input is empty");
    std::string header;
    for (std::size_t i = 0; i < rows[0].cells.size(); ++i) {
      if (i) header += ',';
      header += trim(rows[0].cells[i]);
    }
    if (header != kCsvHeader) {
      throw InputError("CSV header must be exactly: " + std::string(kCsvHeader));
    }
    for (std::size_t r = 1; r < rows.size(); ++r) {
      AdRecord record;
      if (auto reason = record_from_csv(rows[r], record); !reason.empty()) {
        result.rejects.push_back({rows[r].line, std::move(reason)});
        continue;
      }
      accept(result, seen, std::move(record), rows[r].line);
    }
  }

  if (result.records.empty()) {
    throw EmptyCorpusError("corpus has no valid records (" +
                           std::to_string(result.rejects.size()) + " rejected)");
  }
  return result;
}

IngestResult ingest(const std::filesystem::path& path, CorpusFormat format) {
  const std::string content = io::read_file(path);
  try {
    return ingest_text(content, format);
  } catch (const EmptyCorpusError& e) {
    throw EmptyCorpusError(path.string() + ": " + e.what());
  }
}

std::string original_text(const AdRecord& record) {
  if (record.title.empty()) return record.description;
  if (record.description.empty()) return record.title;
  return record.title + " " + record.description;
}

std::string normalize_text(std::string_view utf8) {
  const std::u32string decoded = text::decode_utf8(utf8);
  std::u32string collapsed;
  collapsed.reserve(decoded.size());
  bool pending_space = false;
  for (char32_t cp : decoded) {
    if (text::is_whitespace(cp)) {
      pending_space = !collapsed.empty();
      continue;
    }
    if (text::is_control(cp)) continue;
    if (pending_space) {
      collapsed.push_back(U' ');
      pending_space = false;
    }
    collapsed.push_back(cp);
  }
  return text::encode_utf8(text::nfc_casefold(collapsed));
}

NormalizedAd normalize(const AdRecord& record) {
  NormalizedAd out;
  out.ad_id = record.ad_id;
  out.original_text = original_text(record);
  out.norm_text = normalize_text(out.original_text);
  const std::u32string cps = text::decode_utf8(out.norm_text);
  out.emoji_count = text::emoji_count(cps);
  out.char_length = cps.size();
  return out;
}

std::vector<NormalizedAd> normalize_all(std::span<const AdRecord> records, unsigned threads) {
  std::vector<NormalizedAd> out(records.size());
  parallel_for(records.size(), threads, [&](std::size_t i) { out[i] = normalize(records[i]); });
  return out;
}

std::string to_jsonl(const AdRecord& r) {
  ordered_json j;
  j["ad_id"] = r.ad_id;
  j["title"] = r.title;
  j["description"] = r.description;
  j["posted_at"] = format_iso8601(r.posted_at);
  j["locations"] = r.locations;
  j["declared_phone"] = r.declared_phone ? json(*r.declared_phone) : json(nullptr);
  j["source"] = r.source;
  return j.dump(-1, ' ', false, json::error_handler_t::replace);
}

std::string to_jsonl(const NormalizedAd& a) {
  ordered_json j;
  j["ad_id"] = a.ad_id;
  j["norm_text"] = a.norm_text;
  j["original_text"] = a.original_text;
  j["emoji_count"] = a.emoji_count;
  j["char_length"] = a.char_length;
  return j.dump(-1, ' ', false, json::error_handler_t::replace);
}

std::string to_jsonl(const Reject& r) {
  ordered_json j;
  j["line"] = r.line;
  j["reason"] = r.reason;
  return j.dump();
}

namespace {

template <typename T>
void write_jsonl(const std::filesystem::path& path, std::span<const T> items) {
  std::string out;
  for (const auto& item : items) {
    out += to_jsonl(item);
    out += '\n';
  }
  io::write_file(path, out);
}

}  // namespace

void write_records_jsonl(const std::filesystem::path& path, std::span<const AdRecord> records) {
  write_jsonl(path, records);
}

void write_normalized_jsonl(const std::filesystem::path& path,
                            std::span<const NormalizedAd> ads) {
  write_jsonl(path, ads);
}

void write_rejects_jsonl(const std::filesystem::path& path, std::span<const Reject> rejects) {
  write_jsonl(path, rejects);
}

std::vector<NormalizedAd> read_normalized_jsonl(const std::filesystem::path& path) {
  const std::string content = io::read_file(path);
  std::vector<NormalizedAd> out;
  io::for_each_line(content, [&](std::string_view line, std::size_t line_no) {
    if (trim(line).empty()) return;
    try {
      const json j = json::parse(line);
      NormalizedAd a;
      a.ad_id = j.at("ad_id").get<std::string>();
      a.norm_text = j.at("norm_text").get<std::string>();
      a.original_text = j.at("original_text").get<std::string>();
      a.emoji_count = j.at("emoji_count").get<std::size_t>();
      a.char_length = j.at("char_length").get<std::size_t>();
      out.push_back(std::move(a));
    } catch (const json::exception& e) {
      throw InputError(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
  });
  return out;
}

}  // namespace adgraph
