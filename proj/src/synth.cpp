#include "adgraph/synth.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <string>
#include <unordered_set>

#include <json.hpp>

#include "adgraph/error.hpp"
#include "adgraph/extract.hpp"
#include "adgraph/io.hpp"
#include "adgraph/rng.hpp"
#include "adgraph/unicode.hpp"

namespace adgraph {

std::optional<SizeDistribution> parse_size_distribution(std::string_view name) {
  if (name == "singletons") return SizeDistribution::singletons;
  if (name == "heavy_tailed") return SizeDistribution::heavy_tailed;
  return std::nullopt;
}

std::string_view to_string(SizeDistribution d) {
  return d == SizeDistribution::singletons ? "singletons" : "heavy_tailed";
}

namespace {

bool in_unit_interval(double x) { return std::isfinite(x) && x >= 0.0 && x <= 1.0; }

}  // namespace

std::size_t SynthSpec::canonical_count() const {
  const auto n = static_cast<std::size_t>(std::llround(static_cast<double>(n_ads) * (1.0 - dup_rate)));
  return std::clamp<std::size_t>(n, 1, std::max<std::size_t>(n_ads, 1));
}

std::size_t SynthSpec::component_count() const {
  if (n_components != 0) return n_components;
  const std::size_t n = canonical_count();
  if (sizes == SizeDistribution::singletons) return n;
  // Components per canonical ad in the reference component table.
  const auto c = static_cast<std::size_t>(std::llround(0.557 * static_cast<double>(n)));
  return std::clamp<std::size_t>(c, 1, n);
}

void SynthSpec::validate() const {
  if (n_ads == 0) throw ConfigError("synth.n_ads", "must be at least 1");
  if (!in_unit_interval(dup_rate)) throw ConfigError("synth.dup_rate", "must be in [0, 1]");
  if (!in_unit_interval(obfuscation_rate)) throw ConfigError("synth.obfuscation_rate", "must be in [0, 1]");
  if (!in_unit_interval(near_dup_fraction)) throw ConfigError("synth.near_dup_fraction", "must be in [0, 1]");
  if (!in_unit_interval(far_span_fraction)) throw ConfigError("synth.far_span_fraction", "must be in [0, 1]");
  if (n_components > n_ads) throw ConfigError("synth.n_components", "more components than ads");
  const std::size_t canonical = canonical_count();
  if (component_count() > canonical) {
    throw ConfigError("synth.n_components", "more components than canonical ads (" +
                                                std::to_string(canonical) + ")");
  }
  if (sizes == SizeDistribution::singletons && component_count() != canonical) {
    throw ConfigError("synth.n_components", "singleton sizes need one component per canonical ad");
  }
}

namespace {

// ---------------------------------------------------------------------------
// Vocabulary

constexpr std::array<std::string_view, 26> kOnsets{{"b", "d", "k", "l", "m", "n", "r", "s", "t",
                                                    "v", "z", "p", "g", "h", "f", "j", "w", "br",
                                                    "tr", "gl", "st", "pl", "ch", "sh", "th", "kr"}};
constexpr std::array<std::string_view, 9> kVowels{{"a", "e", "i", "o", "u", "ai", "ea", "ou", "y"}};
constexpr std::array<std::string_view, 10> kCodas{{"", "", "n", "r", "l", "s", "m", "x", "nd", "st"}};

constexpr std::array<std::string_view, 30> kReservedWords{
    {"zero", "one",   "two",  "three", "four", "five", "six", "seven", "eight", "nine",
     "oh",   "o",     "to",   "too",   "for",  "ate",  "www", "http",  "https", "com",
     "net",  "org",   "is",   "at",    "me",   "on",   "my",  "id",    "now",   "the"}};

bool reserved(std::string_view w) {
  if (w.size() < 3) return true;
  if (std::find(kReservedWords.begin(), kReservedWords.end(), w) != kReservedWords.end()) return true;
  return social_platform(w).has_value();
}

class Vocabulary {
 public:
  Vocabulary() {
    Rng rng(0x766f636162ULL);
    std::unordered_set<std::string> seen;
    while (words_.size() < 3000) {
      std::string w;
      const auto syllables = 1 + rng.below(3);
      for (std::uint64_t s = 0; s < syllables; ++s) {
        w += kOnsets[rng.below(kOnsets.size())];
        w += kVowels[rng.below(kVowels.size())];
        w += kCodas[rng.below(kCodas.size())];
      }
      if (reserved(w) || !seen.insert(w).second) continue;
      words_.push_back(std::move(w));
    }
  }
  const std::string& pick(Rng& rng) const { return words_[rng.below(words_.size())]; }

 private:
  std::vector<std::string> words_;
};

const Vocabulary& vocabulary() {
  static const Vocabulary v;
  return v;
}

constexpr std::array<std::string_view, 12> kEmojis{{"\U0001F48B", "\U0001F525", "\U0001F339", "✨",
                                                    "\U0001F4A6", "\U0001F618", "\U0001F352", "\U0001F451",
                                                    "\U0001F496", "\U0001F338", "\U0001F49C", "\U0001F31F"}};
constexpr std::array<std::string_view, 10> kSlang{
    {"2nite", "h0t", "b4", "gr8", "luv", "xoxo", "ur", "lol", "omg", "bby"}};
constexpr std::array<std::string_view, 10> kSpelled{
    {"zero", "one", "two", "three", "four", "five", "six", "seven", "eight", "nine"}};
constexpr std::array<std::string_view, 3> kUnresolvable{{"Downtown", "Eastside", "Near the airport"}};

// ---------------------------------------------------------------------------
// Identifiers

struct Planted {
  IdentifierKind kind;
  std::string canonical;  // as produced by extraction
  std::string a;          // phone digits, handle, email, or url host
  std::string b;          // platform or url path
  std::string key() const { return std::string(to_string(kind)) + ":" + canonical; }
};

class IdentifierFactory {
 public:
  explicit IdentifierFactory(Rng& rng) : rng_(rng) {}

  Planted make(IdentifierKind kind) {
    switch (kind) {
      case IdentifierKind::phone: {
        // Bijection on [0, 8e9) keeps numbers unique with a 2-9 leading digit.
        const std::uint64_t v = (phone_counter_++ * 2654435761ULL + 123456789ULL) % 8000000000ULL;
        std::string digits = std::to_string(2000000000ULL + v);
        return {kind, digits, digits, ""};
      }
      case IdentifierKind::social_handle: {
        static constexpr std::array<std::string_view, 4> kPlatforms{
            {"snapchat", "instagram", "whatsapp", "telegram"}};
        const std::string platform(kPlatforms[rng_.below(kPlatforms.size())]);
        std::string h;
        do {
          h = vocabulary().pick(rng_);
          if (rng_.chance(0.5)) {
            h += std::to_string(10 + rng_.below(90));
          } else {
            h += "_" + vocabulary().pick(rng_);
          }
        } while (h.size() > 30 || !used_.insert("h:" + h).second);
        return {kind, platform + ":" + h, h, platform};
      }
      case IdentifierKind::email: {
        static constexpr std::array<std::string_view, 3> kTlds{{"com", "net", "org"}};
        std::string e;
        do {
          e = vocabulary().pick(rng_) + "." + vocabulary().pick(rng_) + "@" + vocabulary().pick(rng_) + "." +
              std::string(kTlds[rng_.below(kTlds.size())]);
        } while (!used_.insert("e:" + e).second);
        return {kind, e, e, ""};
      }
      case IdentifierKind::url: {
        std::string host, path;
        const bool secure = rng_.chance(0.5);
        do {
          host = (secure ? "" : "www.") + vocabulary().pick(rng_) + vocabulary().pick(rng_) + ".com";
          path = vocabulary().pick(rng_);
        } while (!used_.insert("u:" + host).second);
        const std::string canonical = std::string(secure ? "https://" : "http://") + host + "/" + path;
        return {kind, canonical, host, path};
      }
    }
    return {};
  }

  IdentifierKind random_kind() {
    const double u = rng_.uniform();
    if (u < 0.5) return IdentifierKind::phone;
    if (u < 0.75) return IdentifierKind::social_handle;
    if (u < 0.9) return IdentifierKind::email;
    return IdentifierKind::url;
  }

 private:
  Rng& rng_;
  std::uint64_t phone_counter_ = 0;
  std::unordered_set<std::string> used_;
};

std::string fullwidth(char d) { return text::encode_utf8(std::u32string(1, static_cast<char32_t>(0xFF10 + (d - '0')))); }

std::string render_phone(const std::string& d, bool obfuscate, Rng& rng) {
  const std::string a = d.substr(0, 3), b = d.substr(3, 3), c = d.substr(6);
  if (!obfuscate) {
    switch (rng.below(5)) {
      case 0: return "(" + a + ") " + b + "-" + c;
      case 1: return a + "-" + b + "-" + c;
      case 2: return a + "." + b + "." + c;
      case 3: return d;
      default: return "+1 " + a + " " + b + " " + c;
    }
  }
  switch (rng.below(7)) {
    case 0: {  // every digit spelled out
      std::string out;
      for (std::size_t i = 0; i < d.size(); ++i) {
        if (i) out += ' ';
        const bool inner = i > 0 && i + 1 < d.size();
        out += d[i] == '0' && inner && rng.chance(0.5) ? std::string("oh") : std::string(kSpelled[d[i] - '0']);
      }
      return out;
    }
    case 1: {  // digits and words mixed inside groups
      std::string out;
      const std::array<std::string, 3> groups{a, b, c};
      for (std::size_t g = 0; g < groups.size(); ++g) {
        if (g) out += ' ';
        bool prev_word = false;
        for (char ch : groups[g]) {
          const bool word = rng.chance(0.5);
          if (word && prev_word) out += '-';
          out += word ? std::string(kSpelled[ch - '0']) : std::string(1, ch);
          prev_word = word;
        }
      }
      return out;
    }
    case 2: {
      const std::string e(kEmojis[rng.below(kEmojis.size())]);
      return a + e + b + e + c;
    }
    case 3: {
      std::string out;
      for (std::size_t i = 0; i < d.size(); ++i) {
        if (i) out += ' ';
        out += d[i];
      }
      return out;
    }
    case 4: {
      std::string out;
      for (std::size_t i = 0; i < d.size(); ++i) {
        if (i == 3 || i == 6) out += '-';
        out += fullwidth(d[i]);
      }
      return out;
    }
    case 5: return a + " ~ " + b + " ~ " + c;
    default: return "☎️ " + a + "*" + b + "*" + c;
  }
}

std::string render_phrase(const Planted& p, bool obfuscate, Rng& rng) {
  switch (p.kind) {
    case IdentifierKind::phone: {
      static constexpr std::array<std::string_view, 4> kLead{{"call", "text", "ring", "reach"}};
      static constexpr std::array<std::string_view, 4> kTail{{"anytime", "xo", "babe", "ok"}};
      return std::string(kLead[rng.below(kLead.size())]) + " " + render_phone(p.a, obfuscate, rng) + " " +
             std::string(kTail[rng.below(kTail.size())]);
    }
    case IdentifierKind::social_handle: {
      const std::string& h = p.a;
      if (p.b == "snapchat") return rng.chance(0.5) ? "add my snap " + h + " now" : "snapchat - " + h + " kisses";
      if (p.b == "instagram") return rng.chance(0.5) ? "ig: @" + h + " xo" : "insta " + h + " lovely";
      if (p.b == "whatsapp") return rng.chance(0.5) ? "whatsapp " + h + " ok" : "wa: " + h + " hugs";
      return rng.chance(0.5) ? "tg:" + h + " hugs" : "telegram @" + h + " sweet";
    }
    case IdentifierKind::email:
      return rng.chance(0.5) ? "email " + p.a + " today" : "mail " + p.a + " anytime";
    case IdentifierKind::url: {
      const bool secure = p.canonical.starts_with("https://");
      const std::string link = (secure ? "https://" : "") + p.a + "/" + p.b;
      return rng.chance(0.5) ? "see " + link + " for more" : "more at " + link + " thanks";
    }
  }
  return {};
}

// ---------------------------------------------------------------------------
// Ad drafts

struct Segment {
  std::string text;
  bool editable = false;  // a prose word open to near-duplicate edits
};

struct Draft {
  std::vector<Segment> title;
  std::vector<Segment> body;
};

std::string capitalize(std::string s) {
  if (!s.empty() && s[0] >= 'a' && s[0] <= 'z') s[0] = static_cast<char>(s[0] - 32);
  return s;
}

std::string join(const std::vector<Segment>& segs, std::string_view sep) {
  std::string out;
  for (std::size_t i = 0; i < segs.size(); ++i) {
    if (i) out += sep;
    out += segs[i].text;
  }
  return out;
}

std::string render_title(const Draft& d) {
  std::vector<Segment> segs = d.title;
  if (!segs.empty()) segs[0].text = capitalize(segs[0].text);
  return join(segs, " ");
}

std::string render_body(const Draft& d, std::string_view sep = " ") {
  std::vector<Segment> segs = d.body;
  if (!segs.empty()) segs[0].text = capitalize(segs[0].text);
  return join(segs, sep) + ".";
}

Draft make_draft(const std::vector<std::string>& phrases, Rng& rng) {
  const auto& vocab = vocabulary();
  Draft d;
  const auto title_words = 3 + rng.below(4);
  for (std::uint64_t i = 0; i < title_words; ++i) d.title.push_back({vocab.pick(rng), true});
  if (rng.chance(0.5)) d.title.push_back({std::string(kEmojis[rng.below(kEmojis.size())]), false});

  const auto words = 25 + rng.below(16);
  for (std::uint64_t i = 0; i < words; ++i) d.body.push_back({vocab.pick(rng), true});
  auto insert_at_random = [&](std::string s) {
    const auto pos = 1 + rng.below(d.body.size());
    d.body.insert(d.body.begin() + static_cast<std::ptrdiff_t>(pos), Segment{std::move(s), false});
  };
  for (const auto& p : phrases) insert_at_random(p);
  const auto slang = rng.below(3);
  for (std::uint64_t i = 0; i < slang; ++i) insert_at_random(std::string(kSlang[rng.below(kSlang.size())]));
  const auto emojis = rng.below(4);
  for (std::uint64_t i = 0; i < emojis; ++i) insert_at_random(std::string(kEmojis[rng.below(kEmojis.size())]));
  return d;
}

// Letter substitutions in prose words, at most `rate` of the text length.
Draft near_copy(const Draft& d, double rate, Rng& rng) {
  Draft out = d;
  std::vector<Segment*> editable;
  for (auto& s : out.title) {
    if (s.editable) editable.push_back(&s);
  }
  for (auto& s : out.body) {
    if (s.editable) editable.push_back(&s);
  }
  const std::size_t length =
      text::codepoint_count(render_title(d)) + 1 + text::codepoint_count(render_body(d));
  const std::size_t edits =
      std::max<std::size_t>(1, static_cast<std::size_t>(std::floor(rate * static_cast<double>(length))));
  static constexpr std::string_view kLetters = "abcdefghijklmnoprstuvwyz";
  std::size_t done = 0;
  for (std::size_t attempts = 0; done < edits && attempts < edits * 20; ++attempts) {
    Segment& seg = *editable[rng.below(editable.size())];
    std::string w = seg.text;
    const auto pos = rng.below(w.size());
    const char c = kLetters[rng.below(kLetters.size())];
    if (c == w[pos]) continue;
    w[pos] = c;
    if (reserved(w)) continue;
    seg.text = std::move(w);
    ++done;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Component sizes

std::vector<std::size_t> component_sizes(std::size_t canonical, std::size_t comps,
                                         Rng& rng) {
  std::vector<std::size_t> sizes(comps, 1);
  const std::size_t budget = canonical - comps;  // ads beyond one per component
  if (budget == 0) return sizes;

  // Multi-ad sizes follow a power law with exponent 2.5, truncated at a
  // quarter of the canonical ads.
  std::size_t cap = std::max<std::size_t>(2, canonical / 4);
  std::vector<double> cdf;
  double mean = 0.0, total = 0.0;
  for (std::size_t s = 2; s <= cap; ++s) {
    const double w = std::pow(static_cast<double>(s), -2.5);
    total += w;
    mean += w * static_cast<double>(s);
    cdf.push_back(total);
  }
  mean /= total;
  std::size_t multi = static_cast<std::size_t>(std::llround(static_cast<double>(budget) / (mean - 1.0)));
  multi = std::clamp<std::size_t>(multi, 1, std::min(budget, comps));
  if (multi * (cap - 1) < budget) cap = (budget + multi - 1) / multi + 1;

  std::vector<std::size_t> extra(multi);
  std::size_t sum = 0;
  for (auto& e : extra) {
    const double u = rng.uniform() * total;
    const auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
    const auto s = 2 + static_cast<std::size_t>(std::min<std::ptrdiff_t>(it - cdf.begin(), static_cast<std::ptrdiff_t>(cdf.size()) - 1));
    e = s - 1;
    sum += e;
  }
  while (sum > budget) {
    auto& e = extra[rng.below(multi)];
    if (e > 1) {
      --e;
      --sum;
    }
  }
  while (sum < budget) {
    auto& e = extra[rng.below(multi)];
    if (e + 1 < cap) {
      ++e;
      ++sum;
    }
  }
  // Multi-ad components are placed at seeded positions.
  std::vector<std::size_t> order(comps);
  for (std::size_t i = 0; i < comps; ++i) order[i] = i;
  rng.shuffle(order.begin(), order.end());
  for (std::size_t i = 0; i < multi; ++i) sizes[order[i]] += extra[i];
  return sizes;
}

// ---------------------------------------------------------------------------
// Locations

struct CityIndex {
  std::vector<std::vector<std::size_t>> near;  // <= 250 miles
  std::vector<std::vector<std::size_t>> far;   // > 350 miles
};

CityIndex index_cities(const Gazetteer& g) {
  const auto& e = g.entries();
  CityIndex idx;
  idx.near.resize(e.size());
  idx.far.resize(e.size());
  for (std::size_t i = 0; i < e.size(); ++i) {
    for (std::size_t j = 0; j < e.size(); ++j) {
      if (i == j) continue;
      const double d = haversine_miles(e[i].point, e[j].point);
      if (d <= 250.0) idx.near[i].push_back(j);
      if (d > 350.0) idx.far[i].push_back(j);
    }
  }
  return idx;
}

struct CanonicalAd {
  std::size_t component = 0;
  std::vector<std::size_t> identifiers;  // indices into the planted table
  std::vector<std::string> locations;
  std::optional<std::string> declared_phone;
  Draft draft;
  UnixSeconds posted_at = 0;
};

struct AdSlot {
  std::size_t canonical = 0;
  bool is_canonical = false;
  bool near = false;
  AdRecord record;
};

template <typename T>
void sort_unique(std::vector<T>& v) {
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
}

}  // namespace

SynthCorpus generate(const SynthSpec& spec, const Gazetteer& gazetteer) {
  spec.validate();
  if (gazetteer.empty()) throw ConfigError("gazetteer.path", "gazetteer has no entries");
  Rng rng(spec.seed, 0x73796e7468ULL);
  const std::size_t n_canonical = spec.canonical_count();
  const std::size_t n_comps = spec.component_count();
  const auto sizes = component_sizes(n_canonical, n_comps, rng);

  IdentifierFactory factory(rng);
  std::vector<Planted> planted;
  auto new_identifier = [&]() {
    planted.push_back(factory.make(factory.random_kind()));
    return planted.size() - 1;
  };

  const CityIndex cities = index_cities(gazetteer);
  const auto& entries = gazetteer.entries();
  std::vector<std::string> unresolvable;
  for (auto name : kUnresolvable) {
    if (!gazetteer.lookup(name)) unresolvable.emplace_back(name);
  }

  std::vector<CanonicalAd> canon;
  canon.reserve(n_canonical);
  for (std::size_t c = 0; c < n_comps; ++c) {
    const std::size_t size = sizes[c];
    const std::size_t home = rng.below(entries.size());
    std::optional<std::size_t> near_city, far_city;
    if (!cities.near[home].empty() && rng.chance(0.6)) near_city = cities.near[home][rng.below(cities.near[home].size())];
    if (size > 1 && !cities.far[home].empty() && rng.chance(spec.far_span_fraction)) {
      far_city = cities.far[home][rng.below(cities.far[home].size())];
    }
    std::vector<std::size_t> pool;
    const std::size_t first = canon.size();
    for (std::size_t i = 0; i < size; ++i) {
      CanonicalAd ad;
      ad.component = c;
      if (i == 0) {
        const bool bare = size == 1 && rng.chance(0.15);
        const std::size_t count = bare ? 0 : 1 + rng.below(2);
        for (std::size_t k = 0; k < count; ++k) ad.identifiers.push_back(new_identifier());
      } else {
        // A tree: every ad shares an identifier with an earlier ad.
        const auto& parent = canon[first + rng.below(i)];
        ad.identifiers.push_back(parent.identifiers[rng.below(parent.identifiers.size())]);
        if (rng.chance(0.5)) {
          ad.identifiers.push_back(rng.chance(0.5) ? new_identifier() : pool[rng.below(pool.size())]);
        }
      }
      sort_unique(ad.identifiers);
      pool.insert(pool.end(), ad.identifiers.begin(), ad.identifiers.end());

      const auto pick_local = [&]() { return near_city && rng.chance(0.5) ? *near_city : home; };
      if (i == 0 && far_city) {
        ad.locations.push_back(entries[*far_city].name);
      } else {
        ad.locations.push_back(entries[pick_local()].name);
        if (rng.chance(0.3)) ad.locations.push_back(entries[pick_local()].name);
      }
      if (!unresolvable.empty() && rng.chance(0.05)) {
        ad.locations.push_back(unresolvable[rng.below(unresolvable.size())]);
      }
      sort_unique(ad.locations);

      std::vector<std::string> phrases;
      std::vector<std::string> phones;
      for (auto id : ad.identifiers) {
        phrases.push_back(render_phrase(planted[id], rng.chance(spec.obfuscation_rate), rng));
        if (planted[id].kind == IdentifierKind::phone) phones.push_back(planted[id].a);
      }
      rng.shuffle(phrases.begin(), phrases.end());
      if (!phones.empty() && rng.chance(0.3)) {
        const auto& d = phones[rng.below(phones.size())];
        ad.declared_phone = "(" + d.substr(0, 3) + ") " + d.substr(3, 3) + "-" + d.substr(6);
      }
      ad.draft = make_draft(phrases, rng);
      ad.posted_at = 1672531200 + static_cast<UnixSeconds>(rng.below(365 * 86400ULL));
      canon.push_back(std::move(ad));
    }
  }

  // Duplicates: cluster sizes from a Polya urn over canonical ads.
  const std::size_t n_dups = spec.n_ads - n_canonical;
  std::vector<std::size_t> urn(n_canonical);
  for (std::size_t i = 0; i < n_canonical; ++i) urn[i] = i;
  urn.reserve(n_canonical + n_dups);
  std::vector<AdSlot> slots;
  slots.reserve(spec.n_ads);
  auto base_record = [&](const CanonicalAd& ad) {
    AdRecord r;
    r.locations = ad.locations;
    r.declared_phone = ad.declared_phone;
    r.source = "synth";
    return r;
  };
  for (std::size_t i = 0; i < n_canonical; ++i) {
    AdSlot s{i, true, false, base_record(canon[i])};
    s.record.title = render_title(canon[i].draft);
    s.record.description = render_body(canon[i].draft);
    s.record.posted_at = canon[i].posted_at;
    slots.push_back(std::move(s));
  }
  for (std::size_t k = 0; k < n_dups; ++k) {
    const std::size_t i = urn[rng.below(urn.size())];
    urn.push_back(i);
    const CanonicalAd& ad = canon[i];
    AdSlot s{i, false, rng.chance(spec.near_dup_fraction), base_record(ad)};
    if (s.near) {
      const Draft edited = near_copy(ad.draft, 0.005 + 0.025 * rng.uniform(), rng);
      s.record.title = render_title(edited);
      s.record.description = render_body(edited);
    } else {
      // Cosmetic variants that normalize to the same text.
      std::string title = render_title(ad.draft);
      std::string body = render_body(ad.draft);
      switch (rng.below(4)) {
        case 0:
          for (auto& ch : title) {
            if (ch >= 'a' && ch <= 'z') ch = static_cast<char>(ch - 32);
          }
          break;
        case 1: body = render_body(ad.draft, "  "); break;
        case 2: body = " " + body + "\n"; break;
        default: break;
      }
      s.record.title = std::move(title);
      s.record.description = std::move(body);
      if (rng.chance(0.2)) {
        for (auto& loc : s.record.locations) {
          for (auto& ch : loc) {
            if (ch >= 'A' && ch <= 'Z') ch = static_cast<char>(ch + 32);
          }
        }
      }
    }
    s.record.posted_at = ad.posted_at + static_cast<UnixSeconds>(3600 + rng.below(60 * 86400ULL));
    slots.push_back(std::move(s));
  }

  rng.shuffle(slots.begin(), slots.end());
  const std::size_t width = std::max<std::size_t>(6, std::to_string(spec.n_ads).size());
  std::vector<std::string> canonical_id(n_canonical);
  for (std::size_t k = 0; k < slots.size(); ++k) {
    std::string num = std::to_string(k + 1);
    if (num.size() < width) num.insert(0, width - num.size(), '0');
    slots[k].record.ad_id = "ad-" + num;
    if (slots[k].is_canonical) canonical_id[slots[k].canonical] = slots[k].record.ad_id;
  }

  SynthCorpus out;
  std::vector<PlantedCluster> clusters(n_canonical);
  std::vector<std::vector<std::string>> cluster_locations(n_canonical);
  for (std::size_t i = 0; i < n_canonical; ++i) clusters[i].canonical_id = canonical_id[i];
  for (auto& s : slots) {
    auto& cl = clusters[s.canonical];
    cl.member_ids.push_back(s.record.ad_id);
    if (s.near) cl.near_ids.push_back(s.record.ad_id);
    auto& locs = cluster_locations[s.canonical];
    locs.insert(locs.end(), s.record.locations.begin(), s.record.locations.end());
    std::vector<std::string> keys;
    for (auto id : canon[s.canonical].identifiers) keys.push_back(planted[id].key());
    sort_unique(keys);
    out.truth.identifiers.emplace(s.record.ad_id, std::move(keys));
    out.ads.push_back(std::move(s.record));
  }
  for (auto& cl : clusters) {
    std::sort(cl.member_ids.begin(), cl.member_ids.end());
    std::sort(cl.near_ids.begin(), cl.near_ids.end());
  }

  const LabelingConfig defaults;
  std::vector<PlantedComponent> comps(n_comps);
  std::vector<std::vector<std::string>> comp_locations(n_comps), comp_keys(n_comps);
  for (std::size_t i = 0; i < n_canonical; ++i) {
    const std::size_t c = canon[i].component;
    comps[c].members.push_back(canonical_id[i]);
    comp_locations[c].insert(comp_locations[c].end(), cluster_locations[i].begin(), cluster_locations[i].end());
    for (auto id : canon[i].identifiers) comp_keys[c].push_back(planted[id].key());
  }
  for (std::size_t c = 0; c < n_comps; ++c) {
    std::sort(comps[c].members.begin(), comps[c].members.end());
    comps[c].features = compute_features(comp_locations[c], comp_keys[c], gazetteer);
    comps[c].htrp_label = apply_rules(comps[c].members.front(), comps[c].features, defaults).label;
  }
  std::sort(comps.begin(), comps.end(),
            [](const PlantedComponent& a, const PlantedComponent& b) { return a.members.front() < b.members.front(); });
  std::sort(clusters.begin(), clusters.end(),
            [](const PlantedCluster& a, const PlantedCluster& b) { return a.canonical_id < b.canonical_id; });
  out.truth.clusters = std::move(clusters);
  out.truth.components = std::move(comps);
  return out;
}

std::string ground_truth_to_json(const GroundTruth& truth) {
  nlohmann::json j;
  j["clusters"] = nlohmann::json::array();
  for (const auto& c : truth.clusters) {
    nlohmann::json o;
    o["canonical_id"] = c.canonical_id;
    o["member_ids"] = c.member_ids;
    o["near_ids"] = c.near_ids;
    j["clusters"].push_back(std::move(o));
  }
  j["components"] = nlohmann::json::array();
  for (const auto& c : truth.components) {
    nlohmann::json o;
    o["members"] = c.members;
    o["max_span_miles"] = c.features.max_span_miles;
    o["unique_phone_count"] = c.features.unique_phone_count;
    o["unique_identifier_count"] = c.features.unique_identifier_count;
    o["unresolved_locations"] = c.features.unresolved_locations;
    o["htrp_label"] = c.htrp_label;
    j["components"].push_back(std::move(o));
  }
  auto& ids = j["identifiers"] = nlohmann::json::object();
  for (const auto& [ad, keys] : truth.identifiers) ids[ad] = keys;
  return j.dump(1) + "\n";
}

GroundTruth ground_truth_from_json(std::string_view json_text) {
  GroundTruth t;
  try {
    const auto j = nlohmann::json::parse(json_text);
    for (const auto& o : j.at("clusters")) {
      t.clusters.push_back({o.at("canonical_id").get<std::string>(),
                            o.at("member_ids").get<std::vector<std::string>>(),
                            o.at("near_ids").get<std::vector<std::string>>()});
    }
    for (const auto& o : j.at("components")) {
      PlantedComponent c;
      c.members = o.at("members").get<std::vector<std::string>>();
      c.features.max_span_miles = o.at("max_span_miles").get<double>();
      c.features.unique_phone_count = o.at("unique_phone_count").get<std::size_t>();
      c.features.unique_identifier_count = o.at("unique_identifier_count").get<std::size_t>();
      c.features.unresolved_locations = o.at("unresolved_locations").get<std::size_t>();
      c.htrp_label = o.at("htrp_label").get<int>();
      t.components.push_back(std::move(c));
    }
    for (const auto& [ad, keys] : j.at("identifiers").items()) {
      t.identifiers.emplace(ad, keys.get<std::vector<std::string>>());
    }
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("malformed ground truth: ") + e.what());
  }
  return t;
}

void write_synth(const SynthCorpus& corpus, const std::filesystem::path& dir) {
  write_records_jsonl(dir / "corpus.jsonl", corpus.ads);
  io::write_file(dir / "ground_truth.json", ground_truth_to_json(corpus.truth));
}

}  // namespace adgraph
