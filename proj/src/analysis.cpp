#include "adgraph/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <numeric>
#include <set>
#include <unordered_map>

#include <json.hpp>

#include "adgraph/error.hpp"

namespace adgraph {

namespace {

bool same_magnitude(double x, double y) {
  return std::abs(x - y) <= 1e-12 * std::max(1.0, std::max(std::abs(x), std::abs(y)));
}

}  // namespace

WilcoxonResult wilcoxon_signed_rank(std::span<const PairedSample> samples, WilcoxonMethod method) {
  if (samples.empty()) throw InputError("signed-rank test needs at least one paired sample");
  std::set<std::string_view> strata;
  std::vector<double> diffs;
  for (const auto& s : samples) {
    if (!std::isfinite(s.value_a) || !std::isfinite(s.value_b)) {
      throw InputError("non-finite paired value in stratum " + s.stratum);
    }
    if (!strata.insert(s.stratum).second) throw InputError("repeated stratum " + s.stratum);
    const double d = s.value_a - s.value_b;
    if (d != 0.0) diffs.push_back(d);
  }

  WilcoxonResult r;
  r.n_effective = diffs.size();
  if (diffs.empty()) {
    r.degenerate = true;
    r.p_value = 1.0;
    return r;
  }

  const std::size_t n = diffs.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(),
            [&](std::size_t x, std::size_t y) { return std::abs(diffs[x]) < std::abs(diffs[y]); });

  // Doubled midranks keep every rank an integer.
  std::vector<std::uint64_t> rank2(n);
  double tie_term = 0.0;
  for (std::size_t s = 0; s < n;) {
    std::size_t e = s + 1;
    while (e < n && same_magnitude(std::abs(diffs[order[e]]), std::abs(diffs[order[s]]))) ++e;
    for (std::size_t k = s; k < e; ++k) rank2[order[k]] = s + 1 + e;
    const double t = static_cast<double>(e - s);
    tie_term += t * t * t - t;
    s = e;
  }
  std::uint64_t wplus2 = 0, total2 = 0;
  for (std::size_t i = 0; i < n; ++i) {
    total2 += rank2[i];
    if (diffs[i] > 0) wplus2 += rank2[i];
  }
  const std::uint64_t wminus2 = total2 - wplus2;
  r.w_plus = static_cast<double>(wplus2) / 2.0;
  r.w_minus = static_cast<double>(wminus2) / 2.0;
  r.statistic = std::min(r.w_plus, r.w_minus);

  const bool exact = method == WilcoxonMethod::exact ||
                     (method == WilcoxonMethod::automatic && n <= kWilcoxonExactMaxN);
  r.exact = exact;
  if (exact) {
    // Number of sign assignments reaching each doubled W+ value.
    std::vector<double> count(total2 + 1, 0.0);
    count[0] = 1.0;
    std::uint64_t reach = 0;
    for (std::size_t i = 0; i < n; ++i) {
      for (std::uint64_t s = reach + 1; s-- > 0;) {
        if (count[s] != 0.0) count[s + rank2[i]] += count[s];
      }
      reach += rank2[i];
    }
    const std::uint64_t w2 = std::min(wplus2, wminus2);
    double tail = 0.0;
    for (std::uint64_t s = 0; s <= w2; ++s) tail += count[s];
    r.p_value = std::min(1.0, 2.0 * tail / std::ldexp(1.0, static_cast<int>(n)));
  } else {
    const double nn = static_cast<double>(n);
    const double mean = nn * (nn + 1.0) / 4.0;
    const double var = nn * (nn + 1.0) * (2.0 * nn + 1.0) / 24.0 - tie_term / 48.0;
    const double z = std::max(0.0, std::abs(r.w_plus - mean) - 0.5) / std::sqrt(var);
    r.p_value = std::clamp(std::erfc(z / std::sqrt(2.0)), std::numeric_limits<double>::min(), 1.0);
  }
  return r;
}

VariantComparison compare_label_variants(std::span<const LabeledAd> labels_a,
                                         std::span<const LabeledAd> labels_b,
                                         const std::function<std::string(std::string_view)>& stratum_of) {
  if (labels_a.size() != labels_b.size()) throw InputError("label variants cover different ad sets");
  std::unordered_map<std::string_view, int> b_label;
  for (const auto& ad : labels_b) b_label.emplace(ad.ad_id, ad.label);
  if (b_label.size() != labels_b.size()) throw InputError("label variant b repeats an ad");

  struct Counts {
    std::size_t ads = 0, pos_a = 0, pos_b = 0;
  };
  std::map<std::string, Counts> by_stratum;
  VariantComparison out;
  std::set<std::string_view> seen;
  for (const auto& ad : labels_a) {
    const auto it = b_label.find(ad.ad_id);
    if (it == b_label.end() || !seen.insert(ad.ad_id).second) {
      throw InputError("label variants cover different ad sets (at " + ad.ad_id + ")");
    }
    auto& c = by_stratum[stratum_of(ad.ad_id)];
    ++c.ads;
    c.pos_a += ad.label ? 1 : 0;
    c.pos_b += it->second ? 1 : 0;
    if (!ad.label && it->second) ++out.flips_0_to_1;
    if (ad.label && !it->second) ++out.flips_1_to_0;
  }

  std::vector<PairedSample> samples;
  for (const auto& [name, c] : by_stratum) {
    const double n = static_cast<double>(c.ads);
    out.strata.push_back({name, c.ads, static_cast<double>(c.pos_a) / n, static_cast<double>(c.pos_b) / n});
    samples.push_back({name, out.strata.back().rate_a, out.strata.back().rate_b});
  }
  if (samples.empty()) {
    out.test.degenerate = true;
  } else {
    out.test = wilcoxon_signed_rank(samples);
  }
  return out;
}

std::string comparison_to_json(const VariantComparison& cmp) {
  nlohmann::ordered_json j;
  auto& t = j["test"];
  t["statistic"] = cmp.test.statistic;
  t["w_plus"] = cmp.test.w_plus;
  t["w_minus"] = cmp.test.w_minus;
  t["p_value"] = cmp.test.p_value;
  t["n_effective"] = cmp.test.n_effective;
  t["degenerate"] = cmp.test.degenerate;
  t["method"] = cmp.test.exact ? "exact" : "normal";
  j["flips"] = {{"zero_to_one", cmp.flips_0_to_1}, {"one_to_zero", cmp.flips_1_to_0}};
  auto& strata = j["strata"] = nlohmann::ordered_json::array();
  for (const auto& s : cmp.strata) {
    nlohmann::ordered_json x;
    x["stratum"] = s.stratum;
    x["ads"] = s.ads;
    x["rate_a"] = s.rate_a;
    x["rate_b"] = s.rate_b;
    strata.push_back(std::move(x));
  }
  return j.dump(2, ' ', false, nlohmann::json::error_handler_t::replace) + "\n";
}

std::string comparison_table(const VariantComparison& cmp) {
  std::string out;
  char line[256];
  std::snprintf(line, sizeof line, "%-28s %8s %10s %10s\n", "stratum", "ads", "rate_a", "rate_b");
  out += line;
  for (const auto& s : cmp.strata) {
    std::snprintf(line, sizeof line, "%-28.28s %8zu %10.4f %10.4f\n", s.stratum.c_str(), s.ads, s.rate_a,
                  s.rate_b);
    out += line;
  }
  std::snprintf(line, sizeof line, "W=%.1f  p=%.6g  n_effective=%zu  method=%s%s\n", cmp.test.statistic,
                cmp.test.p_value, cmp.test.n_effective, cmp.test.exact ? "exact" : "normal",
                cmp.test.degenerate ? "  (degenerate)" : "");
  out += line;
  std::snprintf(line, sizeof line, "flips: 0->1 %zu, 1->0 %zu\n", cmp.flips_0_to_1, cmp.flips_1_to_0);
  out += line;
  return out;
}

}  // namespace adgraph
