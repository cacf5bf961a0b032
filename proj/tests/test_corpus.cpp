#include <doctest.h>

#include <filesystem>
#include <string>

#include "adgraph/corpus.hpp"
#include "adgraph/error.hpp"
#include "adgraph/io.hpp"
#include "adgraph/timestamp.hpp"
#include "adgraph/unicode.hpp"

using namespace adgraph;

namespace {

std::string jsonl_line(const std::string& id, const std::string& title) {
  return R"({"ad_id":")" + id + R"(","title":")" + title +
         R"(","description":"sweet and fun","posted_at":"2023-05-01T10:00:00Z","locations":["Boston"],"source":"site-a"})";
}

}  // namespace

TEST_CASE("three valid JSONL lines give three records") {
  const std::string content =
      jsonl_line("A1", "one") + "\n" + jsonl_line("A2", "two") + "\n" + jsonl_line("A3", "three") + "\n";
  const auto r = ingest_text(content, CorpusFormat::jsonl);
  CHECK(r.records.size() == 3);
  CHECK(r.rejects.empty());
  CHECK(r.records[1].ad_id == "A2");
  CHECK(r.records[1].locations == std::vector<std::string>{"Boston"});
  CHECK(r.records[1].source == "site-a");
}

TEST_CASE("missing ad_id is rejected with its reason and line") {
  const std::string content =
      jsonl_line("A1", "one") + "\n" +
      R"({"title":"x","description":"y","posted_at":"2023-05-01T10:00:00Z"})" + "\n";
  const auto r = ingest_text(content, CorpusFormat::jsonl);
  REQUIRE(r.rejects.size() == 1);
  CHECK(r.rejects[0].reason == "missing ad_id");
  CHECK(r.rejects[0].line == 2);
  CHECK(r.records.size() == 1);
}

TEST_CASE("a repeated ad_id keeps the first record") {
  const std::string content = jsonl_line("A1", "first") + "\n" + jsonl_line("A1", "second") + "\n";
  const auto r = ingest_text(content, CorpusFormat::jsonl);
  REQUIRE(r.records.size() == 1);
  CHECK(r.records[0].title == "first");
  REQUIRE(r.rejects.size() == 1);
  CHECK(r.rejects[0].reason == "duplicate ad_id");
}

TEST_CASE("malformed rows are reported, not dropped") {
  const std::string content = jsonl_line("A1", "one") + "\n" + "{not json\n" +
                              R"({"ad_id":"A2","title":"t","posted_at":"2023-05-01T10:00:00"})" + "\n" +
                              R"({"ad_id":"A3","posted_at":"2023-05-01T10:00:00Z"})" + "\n";
  const auto r = ingest_text(content, CorpusFormat::jsonl);
  CHECK(r.records.size() == 1);
  REQUIRE(r.rejects.size() == 3);
  CHECK(r.rejects[0].reason == "invalid JSON");
  CHECK(r.rejects[1].reason == "invalid posted_at");
  CHECK(r.rejects[2].reason == "empty title and description");
}

TEST_CASE("a corpus without valid rows is an explicit error") {
  CHECK_THROWS_AS(ingest_text("{bad\n", CorpusFormat::jsonl), EmptyCorpusError);
  CHECK_THROWS_AS(ingest_text("", CorpusFormat::jsonl), EmptyCorpusError);
}

TEST_CASE("unreadable file is an I/O error") {
  CHECK_THROWS_AS(ingest("/nonexistent/dir/corpus.jsonl", CorpusFormat::jsonl), IoError);
}

TEST_CASE("CSV with quoted cells and multi-line descriptions") {
  const std::string content =
      std::string(kCsvHeader) + "\n" +
      "B1,\"Hi, there\",\"line one\nline two\",2023-01-02T03:04:05Z,Boston; Chicago,555-123-4567,site-b\n" +
      "B2,plain,\"say \"\"hi\"\"\",2023-01-02T03:04:05+02:00,,,\n" + "B3,short,row\n";
  const auto r = ingest_text(content, CorpusFormat::csv);
  REQUIRE(r.records.size() == 2);
  CHECK(r.records[0].title == "Hi, there");
  CHECK(r.records[0].description == "line one\nline two");
  CHECK(r.records[0].locations == std::vector<std::string>{"Boston", "Chicago"});
  CHECK(r.records[0].declared_phone == std::optional<std::string>("555-123-4567"));
  CHECK(r.records[1].description == "say \"hi\"");
  CHECK(r.records[1].posted_at == *parse_iso8601("2023-01-02T01:04:05Z"));
  CHECK_FALSE(r.records[1].declared_phone.has_value());
  REQUIRE(r.rejects.size() == 1);
  CHECK(r.rejects[0].line == 5);
  CHECK(r.rejects[0].reason == "expected 7 columns");
}

TEST_CASE("CSV header contract is enforced") {
  CHECK_THROWS_AS(ingest_text("id,title\nx,y\n", CorpusFormat::csv), InputError);
}

TEST_CASE("JSONL round trip through the writer") {
  AdRecord a;
  a.ad_id = "R1";
  a.title = "Café \"quote\"";
  a.description = "new in town 🌹 call";
  a.posted_at = *parse_iso8601("2022-12-31T23:59:59Z");
  a.locations = {"Boston", "New York"};
  a.declared_phone = "(555) 123-4567";
  a.source = "s";
  AdRecord b = a;
  b.ad_id = "R2";
  b.declared_phone.reset();
  b.locations.clear();
  const std::vector<AdRecord> records{a, b};
  const auto dir = std::filesystem::temp_directory_path() / "adgraph_corpus_rt";
  std::filesystem::remove_all(dir);
  write_records_jsonl(dir / "ads.jsonl", records);
  const auto back = ingest(dir / "ads.jsonl", CorpusFormat::jsonl);
  CHECK(back.rejects.empty());
  CHECK(back.records == records);
  std::filesystem::remove_all(dir);
}

TEST_CASE("normalization examples") {
  CHECK(normalize_text("  Hello   WORLD  ") == "hello world");
  AdRecord r;
  r.ad_id = "N1";
  r.title = "Call 2nite";
  r.description = "🌹🌹";
  const auto n = normalize(r);
  CHECK(n.norm_text == "call 2nite 🌹🌹");
  CHECK(n.emoji_count == 2);
  CHECK(n.original_text == "Call 2nite 🌹🌹");
  CHECK(n.char_length == text::codepoint_count(n.norm_text));
}

TEST_CASE("normalization keeps digits and in-token punctuation, strips controls") {
  CHECK(normalize_text("Text: 555-123-4567!") == "text: 555-123-4567!");
  CHECK(normalize_text("a\tb\u0007c\r\nd") == "a bc d");
  CHECK(normalize_text("STRASSE Straße") == "strasse strasse");
  CHECK(normalize_text("é") == "é");
  CHECK(normalize_text("  x  ") == "x");
}

TEST_CASE("normalization is idempotent") {
  const char* samples[] = {"  Hello   WORLD  ", "Straße ΣΊΣΥΦΟΣ 💋💋 é", "ﬁne ǅ ᾼ", "text\x01me \u200b now",
                           "Ｆｕｌｌ ｗｉｄｔｈ １２３", "İstanbul"};
  for (const char* s : samples) {
    const auto once = normalize_text(s);
    CHECK(normalize_text(once) == once);
  }
}

TEST_CASE("normalized artifact round trip") {
  AdRecord r;
  r.ad_id = "N2";
  r.title = "Sweet 🌸";
  r.description = "NEW girl";
  const std::vector<NormalizedAd> ads{normalize(r)};
  const auto dir = std::filesystem::temp_directory_path() / "adgraph_norm_rt";
  std::filesystem::remove_all(dir);
  write_normalized_jsonl(dir / "normalized.jsonl", ads);
  CHECK(read_normalized_jsonl(dir / "normalized.jsonl") == ads);
  std::filesystem::remove_all(dir);
}

TEST_CASE("timestamps require a zone designator") {
  CHECK(parse_iso8601("1970-01-01T00:00:00Z") == std::optional<UnixSeconds>(0));
  CHECK(parse_iso8601("2000-03-01T00:00:00.750Z") == std::optional<UnixSeconds>(951868800));
  CHECK(parse_iso8601("2000-03-01T01:30:00+0130") == std::optional<UnixSeconds>(951868800));
  CHECK_FALSE(parse_iso8601("2000-03-01T00:00:00").has_value());
  CHECK_FALSE(parse_iso8601("2000-02-30T00:00:00Z").has_value());
  CHECK(format_iso8601(951868800) == "2000-03-01T00:00:00Z");
}
