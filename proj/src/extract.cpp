#include "adgraph/extract.hpp"

#include <algorithm>
#include <array>
#include <set>
#include <unordered_map>

#include <json.hpp>

#include "adgraph/error.hpp"
#include "adgraph/io.hpp"
#include "adgraph/unicode.hpp"

namespace adgraph {

using text::ascii_lower;
using text::is_ascii_alnum;
using text::is_ascii_alpha;
using text::is_ascii_digit;

std::string_view to_string(IdentifierKind kind) {
  switch (kind) {
    case IdentifierKind::phone: return "phone";
    case IdentifierKind::email: return "email";
    case IdentifierKind::social_handle: return "social_handle";
    case IdentifierKind::url: return "url";
  }
  return "unknown";
}

std::optional<IdentifierKind> parse_identifier_kind(std::string_view name) {
  if (name == "phone") return IdentifierKind::phone;
  if (name == "email") return IdentifierKind::email;
  if (name == "social_handle") return IdentifierKind::social_handle;
  if (name == "url") return IdentifierKind::url;
  return std::nullopt;
}

std::string Identifier::key() const { return std::string(to_string(kind)) + ":" + canonical; }

namespace {

std::string lower_ascii(std::u32string_view s) {
  std::string out;
  out.reserve(s.size());
  for (char32_t cp : s) {
    if (cp >= 0x80) return {};
    out.push_back(static_cast<char>(ascii_lower(cp)));
  }
  return out;
}

std::string lower_ascii(std::string_view s) {
  std::string out(s);
  for (auto& c : out) {
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c + 32);
  }
  return out;
}

std::string_view trim_view(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\n' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\n' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

// ---------------------------------------------------------------------------
// Phone deobfuscation

struct DigitWord {
  std::string_view word;
  char digit;
  bool edge_allowed;  // false: only valid strictly inside a digit window
};

constexpr std::array<DigitWord, 16> kDigitWords{{
    {"zero", '0', true},  {"one", '1', true},  {"two", '2', true},   {"three", '3', true},
    {"four", '4', true},  {"five", '5', true}, {"six", '6', true},   {"seven", '7', true},
    {"eight", '8', true}, {"nine", '9', true}, {"oh", '0', false},   {"o", '0', false},
    {"to", '2', false},   {"too", '2', false}, {"for", '4', false},  {"ate", '8', false},
}};

const DigitWord* lookup_digit_word(std::string_view w) {
  for (const auto& dw : kDigitWords) {
    if (dw.word == w) return &dw;
  }
  return nullptr;
}

int digit_value(char32_t cp) {
  if (is_ascii_digit(cp)) return static_cast<int>(cp - U'0');
  if (cp >= 0xFF10 && cp <= 0xFF19) return static_cast<int>(cp - 0xFF10);
  return -1;
}

bool is_phone_separator(char32_t cp) {
  switch (cp) {
    case U'-': case U'.': case U'(': case U')': case U'/': case U'+': case U'_':
    case U'*': case U'~': case U'\'': case U'"': case U'|':
    case U'[': case U']':
    case 0x2012: case 0x2013: case 0x2014: case 0x2022: case 0x00B7:
      return true;
    default:
      return text::is_whitespace(cp) || text::is_emoji(cp);
  }
}

struct PhoneUnit {
  std::size_t start = 0;
  std::size_t end = 0;
  std::string digits;
  bool edge_allowed = true;
  std::size_t gap_before = 0;
};

constexpr std::size_t kMaxGap = 3;
constexpr std::size_t kMinDigits = 10;
constexpr std::size_t kMaxDigits = 15;

void emit_range(const std::vector<PhoneUnit>& units, std::size_t first, std::size_t last,
                std::vector<PhoneMatch>& out) {
  std::string digits;
  for (std::size_t u = first; u <= last; ++u) digits += units[u].digits;
  if (auto canonical = canonical_phone_digits(digits)) {
    out.push_back({std::move(*canonical), {units[first].start, units[last].end}});
  }
}

// Resolves one window of digit units into zero or more phone matches.
void resolve_window(std::vector<PhoneUnit>& units, std::vector<PhoneMatch>& out) {
  std::size_t lo = 0, hi = units.size();
  while (lo < hi && !units[lo].edge_allowed) ++lo;
  while (hi > lo && !units[hi - 1].edge_allowed) --hi;
  if (hi - lo == 0) return;

  // Groups are runs of units with no separator between them; long windows
  // are only cut at group boundaries.
  struct Group {
    std::size_t first, last, digits;
  };
  std::vector<Group> groups;
  for (std::size_t u = lo; u < hi; ++u) {
    if (groups.empty() || (u > lo && units[u].gap_before > 0)) groups.push_back({u, u, 0});
    groups.back().last = u;
    groups.back().digits += units[u].digits.size();
  }
  std::size_t total = 0;
  for (const auto& g : groups) total += g.digits;
  if (total < kMinDigits) return;
  if (total <= kMaxDigits) {
    emit_range(units, lo, hi - 1, out);
    return;
  }

  std::size_t g = 0;
  while (g < groups.size()) {
    std::size_t count = 0;
    std::size_t exact_end = groups.size();
    std::size_t longest_end = groups.size();
    for (std::size_t e = g; e < groups.size(); ++e) {
      count += groups[e].digits;
      if (count > kMaxDigits) break;
      const char lead = units[groups[g].first].digits.front();
      if (count == 10 || (count == 11 && lead == '1')) {
        exact_end = e;
        break;
      }
      if (count >= kMinDigits) longest_end = e;
    }
    const std::size_t end = exact_end != groups.size() ? exact_end : longest_end;
    if (end == groups.size()) {
      ++g;
      continue;
    }
    emit_range(units, groups[g].first, groups[end].last, out);
    g = end + 1;
  }
}

}  // namespace

std::optional<std::string> canonical_phone_digits(std::string_view digits) {
  if (digits.size() == 11 && digits.front() == '1') digits.remove_prefix(1);
  if (digits.size() < kMinDigits || digits.size() > kMaxDigits) return std::nullopt;
  if (!std::all_of(digits.begin(), digits.end(), [](char c) { return c >= '0' && c <= '9'; })) {
    return std::nullopt;
  }
  return std::string(digits);
}

std::vector<PhoneMatch> deobfuscate_phone(std::u32string_view text) {
  std::vector<PhoneMatch> out;
  std::vector<PhoneUnit> window;
  std::size_t gap = 0;
  bool broken = false;

  auto push_unit = [&](PhoneUnit unit) {
    if (!window.empty() && (broken || gap > kMaxGap)) {
      resolve_window(window, out);
      window.clear();
    }
    unit.gap_before = window.empty() ? 0 : gap;
    window.push_back(std::move(unit));
    gap = 0;
    broken = false;
  };

  std::size_t i = 0;
  while (i < text.size()) {
    const char32_t cp = text[i];
    if (const int d = digit_value(cp); d >= 0) {
      push_unit({i, i + 1, std::string(1, static_cast<char>('0' + d)), true, 0});
      ++i;
      continue;
    }
    if (is_ascii_alpha(cp)) {
      std::size_t j = i;
      while (j < text.size() && is_ascii_alpha(text[j])) ++j;
      const bool glued_to_letter = j < text.size() && text[j] >= 0x80 &&
                                   !is_phone_separator(text[j]) && !text::is_emoji_joiner(text[j]);
      const DigitWord* dw = glued_to_letter ? nullptr : lookup_digit_word(lower_ascii(text.substr(i, j - i)));
      if (dw) {
        push_unit({i, j, std::string(1, dw->digit), dw->edge_allowed, 0});
      } else {
        broken = true;
      }
      i = j;
      continue;
    }
    if (text::is_emoji_joiner(cp)) {
      ++i;
      continue;
    }
    if (is_phone_separator(cp)) {
      ++gap;
    } else {
      broken = true;
    }
    ++i;
  }
  if (!window.empty()) resolve_window(window, out);
  return out;
}

std::vector<PhoneMatch> deobfuscate_phone(std::string_view utf8) {
  return deobfuscate_phone(text::decode_utf8(utf8));
}

// ---------------------------------------------------------------------------
// Emails, URLs and social handles

namespace {

bool is_email_local_char(char32_t c) {
  return is_ascii_alnum(c) || c == U'.' || c == U'_' || c == U'%' || c == U'+' || c == U'-';
}
bool is_domain_char(char32_t c) { return is_ascii_alnum(c) || c == U'.' || c == U'-'; }

bool valid_domain(std::string_view domain) {
  if (domain.empty() || domain.front() == '.' || domain.back() == '.') return false;
  const auto dot = domain.rfind('.');
  if (dot == std::string_view::npos) return false;
  if (domain.find("..") != std::string_view::npos) return false;
  const auto tld = domain.substr(dot + 1);
  return tld.size() >= 2 &&
         std::all_of(tld.begin(), tld.end(), [](char c) { return c >= 'a' && c <= 'z'; });
}

bool valid_email(std::string_view email) {
  const auto at = email.find('@');
  if (at == std::string_view::npos || email.find('@', at + 1) != std::string_view::npos) return false;
  const auto local = email.substr(0, at);
  if (local.empty() || local.front() == '.' || local.back() == '.') return false;
  for (char c : local) {
    if (!is_email_local_char(static_cast<unsigned char>(c))) return false;
  }
  const auto domain = email.substr(at + 1);
  for (char c : domain) {
    if (!is_domain_char(static_cast<unsigned char>(c))) return false;
  }
  return valid_domain(domain);
}

void scan_emails(std::u32string_view t, std::vector<Identifier>& out) {
  for (std::size_t at = 0; at < t.size(); ++at) {
    if (t[at] != U'@') continue;
    std::size_t s = at;
    while (s > 0 && is_email_local_char(t[s - 1])) --s;
    std::size_t e = at + 1;
    while (e < t.size() && is_domain_char(t[e])) ++e;
    while (e > at + 1 && (t[e - 1] == U'.' || t[e - 1] == U'-')) --e;
    while (s < at && t[s] == U'.') ++s;
    if (s == at || e == at + 1) continue;
    const std::u32string_view span = t.substr(s, e - s);
    const std::string lowered = lower_ascii(span);
    if (!valid_email(lowered)) continue;
    out.push_back({IdentifierKind::email, {s, e}, text::encode_utf8(span), lowered});
  }
}

bool is_url_char(char32_t c) {
  if (c >= 0x80 || c <= 0x20) return false;
  switch (c) {
    case U'<': case U'>': case U'"': case U'\'': case U'`': case U'{': case U'}': case U'|':
    case U'\\': case U'^':
      return false;
    default:
      return true;
  }
}

bool is_trailing_url_punct(char32_t c) {
  switch (c) {
    case U'.': case U',': case U'!': case U'?': case U';': case U':': case U')': case U']':
      return true;
    default:
      return false;
  }
}

std::optional<std::string> canonical_url(std::string_view raw) {
  raw = trim_view(raw);
  const std::string lowered = lower_ascii(raw);
  std::string scheme;
  std::size_t rest_at = 0;
  if (lowered.starts_with("https://")) {
    scheme = "https";
    rest_at = 8;
  } else if (lowered.starts_with("http://")) {
    scheme = "http";
    rest_at = 7;
  } else if (lowered.starts_with("www.")) {
    scheme = "http";
    rest_at = 0;
  } else {
    return std::nullopt;
  }
  std::string_view rest = raw.substr(rest_at);
  const auto host_end = rest.find_first_of("/?#");
  const std::string host = lower_ascii(rest.substr(0, host_end));
  std::string_view host_no_port = host;
  if (const auto colon = host_no_port.find(':'); colon != std::string_view::npos) {
    const auto port = host_no_port.substr(colon + 1);
    if (port.empty() || !std::all_of(port.begin(), port.end(), [](char c) { return c >= '0' && c <= '9'; })) {
      return std::nullopt;
    }
    host_no_port = host_no_port.substr(0, colon);
  }
  for (char c : host_no_port) {
    if (!is_domain_char(static_cast<unsigned char>(c))) return std::nullopt;
  }
  if (!valid_domain(host_no_port)) return std::nullopt;
  std::string out = scheme + "://" + host;
  if (host_end != std::string_view::npos) out += rest.substr(host_end);
  return out;
}

void scan_urls(std::u32string_view t, std::vector<Identifier>& out) {
  static constexpr std::u32string_view kStarts[] = {U"https://", U"http://", U"www."};
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (i > 0) {
      const char32_t p = t[i - 1];
      if (is_ascii_alnum(p) || p == U'.' || p == U'@' || p == U'-' || p == U'/') continue;
    }
    bool starts = false;
    for (auto prefix : kStarts) {
      if (i + prefix.size() > t.size()) continue;
      bool match = true;
      for (std::size_t k = 0; k < prefix.size() && match; ++k) match = ascii_lower(t[i + k]) == prefix[k];
      if (match) {
        starts = true;
        break;
      }
    }
    if (!starts) continue;
    std::size_t e = i;
    while (e < t.size() && is_url_char(t[e])) ++e;
    while (e > i && is_trailing_url_punct(t[e - 1])) --e;
    const std::string raw = text::encode_utf8(t.substr(i, e - i));
    if (auto canonical = canonical_url(raw)) {
      out.push_back({IdentifierKind::url, {i, e}, raw, std::move(*canonical)});
      i = e;
    }
  }
}

struct Token {
  std::size_t start, end;
};

std::vector<Token> whitespace_tokens(std::u32string_view t) {
  std::vector<Token> out;
  std::size_t i = 0;
  while (i < t.size()) {
    while (i < t.size() && text::is_whitespace(t[i])) ++i;
    const std::size_t s = i;
    while (i < t.size() && !text::is_whitespace(t[i])) ++i;
    if (i > s) out.push_back({s, i});
  }
  return out;
}

bool is_handle_trailing_punct(char c) {
  return c == '.' || c == ',' || c == '!' || c == '?' || c == ';' || c == ':' || c == ')';
}

constexpr std::array<std::string_view, 12> kHandleFillers{
    {"-", ":", "=", "->", "=>", "is", "at", "@", "me", "on", "my", "id"}};
constexpr std::array<std::string_view, 9> kHandleStopWords{
    {"or", "and", "me", "now", "only", "the", "for", "to", "please"}};

std::optional<std::string> valid_handle(std::string_view h) {
  while (!h.empty() && is_handle_trailing_punct(h.back())) h.remove_suffix(1);
  if (!h.empty() && h.front() == '@') h.remove_prefix(1);
  if (h.size() < 3 || h.size() > 30) return std::nullopt;
  bool has_letter = false;
  for (char c : h) {
    const bool letter = c >= 'a' && c <= 'z';
    has_letter = has_letter || letter;
    if (!(letter || (c >= '0' && c <= '9') || c == '.' || c == '_' || c == '-')) return std::nullopt;
  }
  if (!has_letter || social_platform(h)) return std::nullopt;
  if (std::find(kHandleStopWords.begin(), kHandleStopWords.end(), h) != kHandleStopWords.end()) {
    return std::nullopt;
  }
  return std::string(h);
}

bool is_filler(std::string_view w) {
  return std::find(kHandleFillers.begin(), kHandleFillers.end(), w) != kHandleFillers.end();
}

std::string strip_keyword_punct(std::string s) {
  while (!s.empty() && (is_handle_trailing_punct(s.back()) || s.back() == '-')) s.pop_back();
  return s;
}

void scan_handles(std::u32string_view t, std::vector<Identifier>& out) {
  const auto tokens = whitespace_tokens(t);
  for (std::size_t k = 0; k < tokens.size(); ++k) {
    const std::string word = lower_ascii(t.substr(tokens[k].start, tokens[k].end - tokens[k].start));
    if (word.empty()) continue;

    // Inline "platform:handle".
    if (const auto colon = word.find(':'); colon != std::string::npos && colon > 0 && colon + 1 < word.size()) {
      if (auto platform = social_platform(word.substr(0, colon))) {
        if (auto handle = valid_handle(word.substr(colon + 1))) {
          const std::size_t hs = tokens[k].start + colon + 1;
          std::size_t he = tokens[k].end;
          while (he > hs && is_handle_trailing_punct(static_cast<char>(t[he - 1]))) --he;
          out.push_back({IdentifierKind::social_handle, {hs, he}, text::encode_utf8(t.substr(hs, he - hs)),
                         std::string(*platform) + ":" + *handle});
        }
        continue;
      }
    }

    const auto platform = social_platform(strip_keyword_punct(word));
    if (!platform) continue;
    std::size_t next = k + 1;
    std::size_t skipped = 0;
    while (next < tokens.size() && skipped < 2) {
      const std::string w = lower_ascii(t.substr(tokens[next].start, tokens[next].end - tokens[next].start));
      if (!is_filler(w)) break;
      ++next;
      ++skipped;
    }
    if (next >= tokens.size()) continue;
    const auto tok = tokens[next];
    const std::string candidate = lower_ascii(t.substr(tok.start, tok.end - tok.start));
    if (auto handle = valid_handle(candidate)) {
      std::size_t he = tok.end;
      while (he > tok.start && is_handle_trailing_punct(static_cast<char>(t[he - 1]))) --he;
      out.push_back({IdentifierKind::social_handle, {tok.start, he},
                     text::encode_utf8(t.substr(tok.start, he - tok.start)),
                     std::string(*platform) + ":" + *handle});
      k = next;
    }
  }
}

}  // namespace

std::optional<std::string_view> social_platform(std::string_view keyword) {
  static const std::unordered_map<std::string_view, std::string_view> kPlatforms{
      {"snap", "snapchat"},  {"snapchat", "snapchat"},   {"insta", "instagram"},
      {"ig", "instagram"},   {"instagram", "instagram"}, {"wa", "whatsapp"},
      {"whatsapp", "whatsapp"}, {"tg", "telegram"},      {"telegram", "telegram"},
  };
  const auto it = kPlatforms.find(lower_ascii(keyword));
  if (it == kPlatforms.end()) return std::nullopt;
  return it->second;
}

std::optional<std::string> canonicalize(IdentifierKind kind, std::string_view raw,
                                        std::string_view context) {
  raw = trim_view(raw);
  if (raw.empty()) return std::nullopt;
  switch (kind) {
    case IdentifierKind::phone: {
      const auto matches = deobfuscate_phone(raw);
      if (matches.empty()) return std::nullopt;
      return matches.front().canonical;
    }
    case IdentifierKind::email: {
      std::string lowered = lower_ascii(raw);
      if (!valid_email(lowered)) return std::nullopt;
      return lowered;
    }
    case IdentifierKind::url:
      return canonical_url(raw);
    case IdentifierKind::social_handle: {
      const std::string lowered = lower_ascii(raw);
      if (const auto colon = lowered.find(':'); colon != std::string::npos) {
        const auto platform = social_platform(trim_view(std::string_view(lowered).substr(0, colon)));
        auto handle = valid_handle(trim_view(std::string_view(lowered).substr(colon + 1)));
        if (!platform || !handle) return std::nullopt;
        return std::string(*platform) + ":" + *handle;
      }
      const auto cps = text::decode_utf8(lowered);
      const auto toks = whitespace_tokens(cps);
      auto token_text = [&](std::u32string_view src, const Token& tk) {
        return text::encode_utf8(src.substr(tk.start, tk.end - tk.start));
      };
      std::optional<std::string_view> platform;
      if (toks.size() >= 2) platform = social_platform(strip_keyword_punct(token_text(cps, toks.front())));
      if (!platform) {
        // Bare handle: look for the nearest platform keyword in the
        // preceding context.
        const auto ctx = text::decode_utf8(lower_ascii(context));
        const auto ctx_toks = whitespace_tokens(ctx);
        for (std::size_t n = 0; n < ctx_toks.size() && n < 4 && !platform; ++n) {
          platform = social_platform(strip_keyword_punct(token_text(ctx, ctx_toks[ctx_toks.size() - 1 - n])));
        }
      }
      if (!platform || toks.empty()) return std::nullopt;
      auto handle = valid_handle(token_text(cps, toks.back()));
      if (!handle) return std::nullopt;
      return std::string(*platform) + ":" + *handle;
    }
  }
  return std::nullopt;
}

std::vector<Identifier> merge_identifiers(std::span<const Identifier> a,
                                          std::span<const Identifier> b) {
  std::vector<Identifier> out;
  std::set<std::pair<IdentifierKind, std::string>> seen;
  for (auto part : {a, b}) {
    for (const auto& id : part) {
      if (seen.emplace(id.kind, id.canonical).second) out.push_back(id);
    }
  }
  return out;
}

std::vector<Identifier> extract_identifiers(const AdRecord& record, const NormalizedAd& ad) {
  const std::u32string t = text::decode_utf8(ad.original_text);
  std::vector<Identifier> found;
  for (auto& m : deobfuscate_phone(t)) {
    found.push_back({IdentifierKind::phone, m.span,
                     text::encode_utf8(std::u32string_view(t).substr(m.span.start, m.span.end - m.span.start)),
                     std::move(m.canonical)});
  }
  scan_emails(t, found);
  scan_urls(t, found);
  scan_handles(t, found);
  std::stable_sort(found.begin(), found.end(), [](const Identifier& x, const Identifier& y) {
    return std::tie(x.raw_span.start, x.kind) < std::tie(y.raw_span.start, y.kind);
  });
  std::vector<Identifier> declared;
  if (record.declared_phone) {
    if (auto canonical = canonicalize(IdentifierKind::phone, *record.declared_phone)) {
      declared.push_back({IdentifierKind::phone, {0, 0}, *record.declared_phone, std::move(*canonical)});
    }
  }
  return merge_identifiers(found, declared);
}

AnnotationImport import_annotations_text(std::string_view content,
                                         std::span<const NormalizedAd> corpus) {
  std::unordered_map<std::string_view, const NormalizedAd*> by_id;
  for (const auto& ad : corpus) by_id.emplace(ad.ad_id, &ad);
  std::unordered_map<std::string_view, std::u32string> decoded;

  AnnotationImport result;
  io::for_each_line(content, [&](std::string_view line, std::size_t line_no) {
    if (trim_view(line).empty()) return;
    const auto j = nlohmann::json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.is_object()) {
      result.rejects.push_back({line_no, "", "invalid JSON"});
      return;
    }
    const auto id_it = j.find("ad_id");
    if (id_it == j.end() || !id_it->is_string()) {
      result.rejects.push_back({line_no, "", "missing ad_id"});
      return;
    }
    const std::string ad_id = id_it->get<std::string>();
    const auto ad = by_id.find(ad_id);
    if (ad == by_id.end()) {
      result.rejects.push_back({line_no, ad_id, "unknown ad_id"});
      return;
    }
    const auto spans = j.find("spans");
    if (spans == j.end() || !spans->is_array()) {
      result.rejects.push_back({line_no, ad_id, "missing spans"});
      return;
    }
    auto [dit, _] = decoded.try_emplace(ad->first, text::decode_utf8(ad->second->original_text));
    const std::u32string_view t = dit->second;
    auto& bucket = result.by_ad[ad_id];
    for (const auto& s : *spans) {
      if (!s.is_object() || !s.contains("start") || !s.contains("end") || !s.contains("label") ||
          !s["start"].is_number_integer() || !s["end"].is_number_integer() || !s["label"].is_string()) {
        result.rejects.push_back({line_no, ad_id, "malformed span"});
        continue;
      }
      const auto start = s["start"].get<long long>();
      const auto end = s["end"].get<long long>();
      if (start < 0 || start >= end || end > static_cast<long long>(t.size())) {
        result.rejects.push_back({line_no, ad_id, "span out of range"});
        continue;
      }
      const auto kind = parse_identifier_kind(s["label"].get<std::string>());
      if (!kind) {
        result.rejects.push_back({line_no, ad_id, "unknown label"});
        continue;
      }
      const Span span{static_cast<std::size_t>(start), static_cast<std::size_t>(end)};
      const std::string raw = text::encode_utf8(t.substr(span.start, span.end - span.start));
      const std::string context = text::encode_utf8(t.substr(0, span.start));
      auto canonical = canonicalize(*kind, raw, context);
      if (!canonical) {
        result.rejects.push_back({line_no, ad_id, "cannot canonicalize " + std::string(to_string(*kind))});
        continue;
      }
      const Identifier id{*kind, span, raw, std::move(*canonical)};
      bucket = merge_identifiers(bucket, std::span(&id, 1));
    }
    if (bucket.empty()) result.by_ad.erase(ad_id);
  });
  return result;
}

AnnotationImport import_annotations(const std::filesystem::path& path,
                                    std::span<const NormalizedAd> corpus) {
  return import_annotations_text(io::read_file(path), corpus);
}

std::string to_jsonl(const std::string& ad_id, const Identifier& id) {
  nlohmann::ordered_json j;
  j["ad_id"] = ad_id;
  j["kind"] = to_string(id.kind);
  j["canonical"] = id.canonical;
  j["raw"] = id.raw;
  j["start"] = id.raw_span.start;
  j["end"] = id.raw_span.end;
  return j.dump(-1, ' ', false, nlohmann::json::error_handler_t::replace);
}

void write_identifiers_jsonl(const std::filesystem::path& path, const IdentifierTable& table) {
  std::string out;
  for (const auto& [ad_id, ids] : table) {
    for (const auto& id : ids) {
      out += to_jsonl(ad_id, id);
      out += '\n';
    }
  }
  io::write_file(path, out);
}

IdentifierTable read_identifiers_jsonl(const std::filesystem::path& path) {
  const std::string content = io::read_file(path);
  IdentifierTable table;
  io::for_each_line(content, [&](std::string_view line, std::size_t line_no) {
    if (line.empty()) return;
    try {
      const auto j = nlohmann::json::parse(line);
      const auto kind = parse_identifier_kind(j.at("kind").get<std::string>());
      if (!kind) throw InputError("unknown identifier kind");
      table[j.at("ad_id").get<std::string>()].push_back(
          {*kind, {j.at("start").get<std::size_t>(), j.at("end").get<std::size_t>()},
           j.at("raw").get<std::string>(), j.at("canonical").get<std::string>()});
    } catch (const nlohmann::json::exception& e) {
      throw InputError(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
  });
  return table;
}

void write_annotation_rejects_jsonl(const std::filesystem::path& path,
                                    std::span<const AnnotationReject> rejects) {
  std::string out;
  for (const auto& r : rejects) {
    nlohmann::ordered_json j;
    j["line"] = r.line;
    j["ad_id"] = r.ad_id;
    j["reason"] = r.reason;
    out += j.dump();
    out += '\n';
  }
  io::write_file(path, out);
}

}  // namespace adgraph
