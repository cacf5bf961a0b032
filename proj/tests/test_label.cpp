#include <doctest.h>

#include <cmath>
#include <fstream>
#include <set>
#include <string>
#include <vector>

#include "adgraph/dedup.hpp"
#include "adgraph/error.hpp"
#include "adgraph/extract.hpp"
#include "adgraph/geo.hpp"
#include "adgraph/graph.hpp"
#include "adgraph/label.hpp"
#include "adgraph/rng.hpp"
#include "oracles.hpp"

using namespace adgraph;

namespace {

Identifier phone(const std::string& digits) { return {IdentifierKind::phone, {0, 0}, digits, digits}; }

// Graph whose components are given as groups of ad ids; each group shares
// one phone.
RelatednessGraph grouped_graph(const std::vector<std::vector<std::string>>& groups) {
  std::vector<DuplicateCluster> clusters;
  IdentifierTable ids;
  long long p = 2000000000;
  for (const auto& g : groups) {
    ++p;
    for (const auto& id : g) {
      clusters.push_back({id, {id}, DedupMethod::exact});
      if (g.size() > 1) ids[id] = {phone(std::to_string(p))};
    }
  }
  return build_graph(clusters, ids);
}

std::u32string random_text(Rng& rng, std::size_t len) {
  std::u32string s;
  for (std::size_t i = 0; i < len; ++i) s.push_back(U'a' + static_cast<char32_t>(rng.below(26)));
  return s;
}

Gazetteer fixture_gazetteer() { return Gazetteer::load(std::string(TEST_DATA_DIR) + "/gazetteer_fixture.csv"); }

}  // namespace

TEST_CASE("ten singletons split 8 to 2") {
  std::vector<std::vector<std::string>> groups;
  for (int i = 0; i < 10; ++i) groups.push_back({"s" + std::to_string(i)});
  const auto g = grouped_graph(groups);
  const auto split = split_components(g, LabelingConfig{});
  CHECK(split.train_ads == 8);
  CHECK(split.test_ads == 2);
  CHECK(split.deviation == doctest::Approx(0.0));
}

TEST_CASE("a giant component goes to train") {
  const auto g = grouped_graph({{"g0", "g1", "g2", "g3", "g4", "g5"}, {"a"}, {"b"}, {"c"}, {"d"}});
  const auto split = split_components(g, LabelingConfig{});
  const auto giant = g.component_of[*g.index_of("g0")];
  CHECK(split.of_component[giant] == Split::train);
  CHECK(split.giant_component_share == doctest::Approx(0.6));
  CHECK(split_report_json(split).find("\"deviation\"") != std::string::npos);
}

TEST_CASE("split artifact round trip and seed determinism") {
  std::vector<std::vector<std::string>> groups;
  for (int i = 0; i < 40; ++i) {
    std::vector<std::string> g;
    for (int j = 0; j <= i % 4; ++j) g.push_back("c" + std::to_string(i) + "_" + std::to_string(j));
    groups.push_back(g);
  }
  const auto g = grouped_graph(groups);
  LabelingConfig cfg;
  cfg.seed = 5;
  const auto a = split_components(g, cfg);
  const auto b = split_components(g, cfg);
  CHECK(split_to_json(g, a) == split_to_json(g, b));
  CHECK(std::fabs(a.deviation) <= 0.05);
  const auto back = split_from_json(g, split_to_json(g, a));
  CHECK(back.of_component == a.of_component);
  CHECK(back.train_ads == a.train_ads);
}

TEST_CASE("two disjoint pairs give one positive per component and balanced negatives") {
  const auto g = grouped_graph({{"a1", "a2"}, {"b1", "b2"}});
  Rng rng(4);
  std::vector<std::u32string> texts;
  for (std::size_t i = 0; i < g.nodes.size(); ++i) texts.push_back(random_text(rng, 60));
  const auto split = split_components(g, LabelingConfig{});
  const auto r = generate_oad_pairs(g, texts, split, LabelingConfig{});
  CHECK(r.positives == 2);
  CHECK(r.negatives == 2);
  REQUIRE(r.pairs.size() == 4);
  std::set<std::pair<std::string, std::string>> pos;
  for (const auto& p : r.pairs) {
    CHECK(p.a < p.b);
    const bool same = g.component_of[*g.index_of(p.a)] == g.component_of[*g.index_of(p.b)];
    CHECK(p.label == (same ? 1 : 0));
    if (p.label == 1) pos.emplace(p.a, p.b);
  }
  CHECK(pos == std::set<std::pair<std::string, std::string>>{{"a1", "a2"}, {"b1", "b2"}});
}

TEST_CASE("a near-duplicate positive pair is discarded") {
  const auto g = grouped_graph({{"n1", "n2"}, {"m1", "m2"}, {"z"}});
  Rng rng(6);
  const auto base = random_text(rng, 100);
  auto near = base;
  near[10] = U'#';
  near[60] = U'#';
  REQUIRE(oracle::similarity_table(base, near) == doctest::Approx(0.98));
  std::vector<std::u32string> texts(g.nodes.size());
  for (std::size_t i = 0; i < g.nodes.size(); ++i) texts[i] = random_text(rng, 100);
  texts[*g.index_of("n1")] = base;
  texts[*g.index_of("n2")] = near;
  const auto split = split_components(g, LabelingConfig{});
  const auto r = generate_oad_pairs(g, texts, split, LabelingConfig{});
  CHECK(r.discarded_similar >= 1);
  for (const auto& p : r.pairs) {
    CHECK_FALSE((p.a == "n1" && p.b == "n2"));
    CHECK(p.similarity < 0.5);
  }
  CHECK(r.positives == r.negatives);
}

TEST_CASE("OAD sampling needs two components") {
  const auto g = grouped_graph({{"a", "b", "c"}});
  const std::vector<std::u32string> texts(3, U"text");
  CHECK_THROWS_AS(generate_oad_pairs(g, texts, split_components(g, LabelingConfig{}), LabelingConfig{}),
                  InputError);
}

TEST_CASE("haversine basics") {
  CHECK(haversine_miles(40.0, -74.0, 40.0, -74.0) == 0.0);
  CHECK(haversine_miles(0.0, 0.0, 0.0, 180.0) == doctest::Approx(M_PI * kEarthRadiusMiles));
  CHECK(haversine_miles(10.0, 20.0, -10.0, -160.0) == doctest::Approx(12436.8).epsilon(1e-5));
  CHECK_THROWS_AS(haversine_miles(91.0, 0.0, 0.0, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(haversine_miles(0.0, 0.0, 0.0, -180.5), std::invalid_argument);
}

TEST_CASE("haversine agrees with the vector oracle") {
  Rng rng(77);
  for (int i = 0; i < 1000; ++i) {
    const double la1 = rng.uniform() * 180.0 - 90.0, lo1 = rng.uniform() * 360.0 - 180.0;
    const double la2 = rng.uniform() * 180.0 - 90.0, lo2 = rng.uniform() * 360.0 - 180.0;
    const double want = oracle::great_circle_miles(la1, lo1, la2, lo2);
    CHECK(haversine_miles(la1, lo1, la2, lo2) == doctest::Approx(want).epsilon(1e-9));
  }
}

TEST_CASE("gazetteer lookups") {
  const auto gaz = fixture_gazetteer();
  CHECK(gaz.size() == 4);
  CHECK(gaz.lookup("  southport ").has_value());
  CHECK(gaz.canonical_name("NORTHFIELD") == std::optional<std::string_view>("Northfield"));
  CHECK_FALSE(gaz.lookup("Atlantis").has_value());
  CHECK_THROWS_AS(Gazetteer::parse("name,lat,lon\nX,200,0\n"), InputError);
}

TEST_CASE("a component spanning 306 miles fires the distance rule") {
  const auto gaz = fixture_gazetteer();
  const auto g = grouped_graph({{"x", "y"}});
  const std::vector<std::vector<std::string>> locs{{"Southport"}, {"Northfield"}};
  const auto labels = label_htrp(g, locs, gaz, LabelingConfig{});
  REQUIRE(labels.size() == 2);
  const double expected = oracle::great_circle_miles(30.0, -90.0, 34.4287864820, -90.0);
  CHECK(expected == doctest::Approx(306.0).epsilon(1e-9));
  for (const auto& l : labels) {
    CHECK(l.label == 1);
    CHECK(l.features.max_span_miles == doctest::Approx(expected).epsilon(1e-9));
    CHECK(l.rule_trace == std::vector<std::string>{std::string(kRuleDistance)});
  }
}

TEST_CASE("a component with three phones fires the phone rule") {
  const auto gaz = fixture_gazetteer();
  std::vector<DuplicateCluster> clusters{{"p", {"p"}, DedupMethod::exact}, {"q", {"q"}, DedupMethod::exact}};
  IdentifierTable ids{{"p", {phone("1111111111"), phone("2222222222")}},
                      {"q", {phone("2222222222"), phone("3333333333")}}};
  const auto g = build_graph(clusters, ids);
  const std::vector<std::vector<std::string>> locs{{"Southport"}, {"Southport"}};
  const auto labels = label_htrp(g, locs, gaz, LabelingConfig{});
  for (const auto& l : labels) {
    CHECK(l.label == 1);
    CHECK(l.features.unique_phone_count == 3);
    CHECK(l.rule_trace == std::vector<std::string>{std::string(kRulePhones)});
  }
  LabelingConfig per_ad;
  per_ad.feature_scope = FeatureScope::ad;
  for (const auto& l : label_htrp(g, locs, gaz, per_ad)) CHECK(l.label == 0);
}

TEST_CASE("a singleton with one city and one phone is negative") {
  const auto gaz = fixture_gazetteer();
  std::vector<DuplicateCluster> clusters{{"solo", {"solo"}, DedupMethod::exact}};
  IdentifierTable ids{{"solo", {phone("1111111111")}}};
  const auto g = build_graph(clusters, ids);
  const std::vector<std::vector<std::string>> locs{{"Midvale"}};
  const auto labels = label_htrp(g, locs, gaz, LabelingConfig{});
  REQUIRE(labels.size() == 1);
  CHECK(labels[0].label == 0);
  CHECK(labels[0].rule_trace.empty());
  CHECK(labels[0].features.max_span_miles == 0.0);
}

TEST_CASE("rule combination and unresolved locations") {
  HtrpFeatures f;
  f.max_span_miles = 400.0;
  f.unique_phone_count = 1;
  LabelingConfig cfg;
  CHECK(apply_rules("a", f, cfg).label == 1);
  cfg.rule_combination = RuleCombination::all;
  CHECK(apply_rules("a", f, cfg).label == 0);
  f.unique_phone_count = 3;
  CHECK(apply_rules("a", f, cfg).label == 1);

  const auto gaz = fixture_gazetteer();
  const std::vector<std::string> locs{"Southport", "Nowhere", " nowhere ", "Eastwick"};
  const std::vector<std::string> keys{"phone:1", "email:a@b.com", "phone:1"};
  const auto feats = compute_features(locs, keys, gaz);
  CHECK(feats.unresolved_locations == 1);
  CHECK(feats.unique_identifier_count == 2);
  CHECK(feats.unique_phone_count == 1);
  CHECK(feats.max_span_miles == doctest::Approx(oracle::great_circle_miles(30.0, -90.0, 30.0, -89.5)));
}

TEST_CASE("empty gazetteer is a config error") {
  const auto g = grouped_graph({{"a"}});
  const std::vector<std::vector<std::string>> locs{{"Southport"}};
  CHECK_THROWS_AS(label_htrp(g, locs, Gazetteer{}, LabelingConfig{}), ConfigError);
}

TEST_CASE("labels are monotone in both thresholds") {
  const auto gaz = Gazetteer::load(GAZETTEER_PATH);
  Rng rng(31);
  std::vector<DuplicateCluster> clusters;
  IdentifierTable ids;
  std::vector<std::vector<std::string>> locs_by_id;
  for (int i = 0; i < 150; ++i) {
    const std::string id = "ad" + std::to_string(1000 + i);
    clusters.push_back({id, {id}, DedupMethod::exact});
    auto& v = ids[id];
    for (std::size_t k = rng.below(4); k > 0; --k) v.push_back(phone(std::to_string(3000000000 + rng.below(90))));
  }
  const auto g = build_graph(clusters, ids);
  std::vector<std::vector<std::string>> locs(g.nodes.size());
  for (auto& l : locs) {
    for (std::size_t k = 1 + rng.below(2); k > 0; --k) l.push_back(gaz.entries()[rng.below(gaz.size())].name);
  }
  std::vector<int> previous;
  for (std::size_t phones = 2; phones <= 5; ++phones) {
    for (double miles = 300.0; miles <= 600.0; miles += 50.0) {
      LabelingConfig cfg;
      cfg.phone_count_threshold = phones;
      cfg.distance_threshold_miles = miles;
      const auto labels = label_htrp(g, locs, gaz, cfg);
      std::vector<int> now;
      for (const auto& l : labels) now.push_back(l.label);
      if (!previous.empty()) {
        for (std::size_t i = 0; i < now.size(); ++i) CHECK(now[i] <= previous[i]);
      }
      previous = now;
    }
    previous.clear();
  }
  for (double miles = 300.0; miles <= 600.0; miles += 50.0) {
    std::vector<int> prev;
    for (std::size_t phones = 2; phones <= 5; ++phones) {
      LabelingConfig cfg;
      cfg.phone_count_threshold = phones;
      cfg.distance_threshold_miles = miles;
      std::vector<int> now;
      for (const auto& l : label_htrp(g, locs, gaz, cfg)) now.push_back(l.label);
      if (!prev.empty()) {
        for (std::size_t i = 0; i < now.size(); ++i) CHECK(now[i] <= prev[i]);
      }
      prev = now;
    }
  }
}

TEST_CASE("labeled ad artifact round trip") {
  const auto gaz = fixture_gazetteer();
  const auto g = grouped_graph({{"x", "y"}, {"z"}});
  const std::vector<std::vector<std::string>> locs{{"Southport"}, {"Northfield"}, {"Atlantis"}};
  const auto labels = label_htrp(g, locs, gaz, LabelingConfig{});
  const auto path = std::filesystem::temp_directory_path() / "adgraph_labels_rt.jsonl";
  {
    std::ofstream out(path);
    for (const auto& l : labels) out << to_jsonl(l) << "\n";
  }
  const auto back = read_labeled_ads_jsonl(path);
  REQUIRE(back.size() == labels.size());
  for (std::size_t i = 0; i < back.size(); ++i) {
    CHECK(back[i].ad_id == labels[i].ad_id);
    CHECK(back[i].label == labels[i].label);
    CHECK(back[i].rule_trace == labels[i].rule_trace);
    CHECK(back[i].features.max_span_miles == doctest::Approx(labels[i].features.max_span_miles));
  }
  std::filesystem::remove(path);
}

TEST_CASE("labeling config is validated") {
  LabelingConfig cfg;
  cfg.split_ratio = 1.0;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
  cfg = LabelingConfig{};
  cfg.phone_count_threshold = 0;
  CHECK_THROWS_AS(cfg.validate(), ConfigError);
}
