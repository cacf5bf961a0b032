#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "adgraph/label.hpp"

namespace adgraph {

struct PairedSample {
  std::string stratum;
  double value_a = 0.0;
  double value_b = 0.0;
};

enum class WilcoxonMethod { automatic, exact, normal };

struct WilcoxonResult {
  double statistic = 0.0;  // W = min(W+, W-)
  double w_plus = 0.0;
  double w_minus = 0.0;
  double p_value = 1.0;  // two-sided
  std::size_t n_effective = 0;
  bool degenerate = false;
  bool exact = true;
};

/// Largest n_effective for which `automatic` enumerates the exact null
/// distribution.
inline constexpr std::size_t kWilcoxonExactMaxN = 25;

/// Wilcoxon signed-rank test on value_a - value_b. Zero differences are
/// dropped and tied magnitudes get midranks. The exact branch counts all
/// 2^n sign assignments; the normal branch uses tie and continuity
/// corrections. Throws InputError for empty input, non-finite values or
/// repeated strata.
WilcoxonResult wilcoxon_signed_rank(std::span<const PairedSample> samples,
                                    WilcoxonMethod method = WilcoxonMethod::automatic);

struct StratumRates {
  std::string stratum;
  std::size_t ads = 0;
  double rate_a = 0.0;
  double rate_b = 0.0;
};

struct VariantComparison {
  WilcoxonResult test;
  std::vector<StratumRates> strata;  // sorted by stratum
  std::size_t flips_0_to_1 = 0;      // label 0 in a, 1 in b
  std::size_t flips_1_to_0 = 0;
};

/// Per-stratum positive rates of two labelings of the same ads, compared
/// with the signed-rank test. Throws InputError when the ad sets differ.
VariantComparison compare_label_variants(std::span<const LabeledAd> labels_a,
                                         std::span<const LabeledAd> labels_b,
                                         const std::function<std::string(std::string_view)>& stratum_of);

std::string comparison_to_json(const VariantComparison& cmp);
std::string comparison_table(const VariantComparison& cmp);

}  // namespace adgraph
