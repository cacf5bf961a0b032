#include <doctest.h>

#include <algorithm>
#include <filesystem>
#include <set>
#include <string>

#include "adgraph/corpus.hpp"
#include "adgraph/dedup.hpp"
#include "adgraph/error.hpp"
#include "adgraph/extract.hpp"
#include "adgraph/geo.hpp"
#include "adgraph/graph.hpp"
#include "adgraph/io.hpp"
#include "adgraph/synth.hpp"

using namespace adgraph;

namespace {

const Gazetteer& gazetteer() {
  static const Gazetteer g = Gazetteer::load(GAZETTEER_PATH);
  return g;
}

struct Recovered {
  std::vector<DuplicateCluster> clusters;
  IdentifierTable identifiers;
  RelatednessGraph graph;
};

Recovered recover(const SynthCorpus& corpus) {
  Recovered r;
  const auto normalized = normalize_all(corpus.ads);
  r.clusters = deduplicate(corpus.ads, normalized, SimilarityConfig{});
  for (std::size_t i = 0; i < corpus.ads.size(); ++i) {
    r.identifiers[corpus.ads[i].ad_id] = extract_identifiers(corpus.ads[i], normalized[i]);
  }
  r.graph = build_graph(r.clusters, r.identifiers);
  return r;
}

}  // namespace

TEST_CASE("all-singleton spec without duplicates") {
  SynthSpec spec;
  spec.n_ads = 100;
  spec.dup_rate = 0.0;
  spec.n_components = 100;
  spec.sizes = SizeDistribution::singletons;
  const auto corpus = generate(spec, gazetteer());
  CHECK(corpus.ads.size() == 100);
  CHECK(corpus.truth.clusters.size() == 100);
  CHECK(corpus.truth.components.size() == 100);
  const auto r = recover(corpus);
  CHECK(r.clusters.size() == 100);
  CHECK(r.graph.edges.empty());
  CHECK(r.graph.components.size() == 100);
}

TEST_CASE("duplication rate sets the canonical count") {
  SynthSpec spec;
  spec.n_ads = 1000;
  spec.dup_rate = 0.9;
  CHECK(spec.canonical_count() == 100);
  const auto corpus = generate(spec, gazetteer());
  CHECK(corpus.ads.size() == 1000);
  CHECK(corpus.truth.clusters.size() == 100);
  std::size_t members = 0;
  for (const auto& c : corpus.truth.clusters) members += c.member_ids.size();
  CHECK(members == 1000);
}

TEST_CASE("same seed gives byte-identical files") {
  SynthSpec spec;
  spec.n_ads = 400;
  spec.seed = 9;
  const auto base = std::filesystem::temp_directory_path() / "adgraph_synth_det";
  std::filesystem::remove_all(base);
  write_synth(generate(spec, gazetteer()), base / "a");
  write_synth(generate(spec, gazetteer()), base / "b");
  for (const char* name : {"corpus.jsonl", "ground_truth.json"}) {
    CHECK(io::read_file(base / "a" / name) == io::read_file(base / "b" / name));
  }
  spec.seed = 10;
  write_synth(generate(spec, gazetteer()), base / "c");
  CHECK(io::read_file(base / "a" / "corpus.jsonl") != io::read_file(base / "c" / "corpus.jsonl"));

  const auto ingested = ingest(base / "a" / "corpus.jsonl", CorpusFormat::jsonl);
  CHECK(ingested.records.size() == 400);
  CHECK(ingested.rejects.empty());
  std::filesystem::remove_all(base);
}

TEST_CASE("infeasible specs are config errors") {
  SynthSpec spec;
  spec.n_ads = 10;
  spec.dup_rate = 0.0;
  spec.n_components = 11;
  CHECK_THROWS_AS(spec.validate(), ConfigError);
  CHECK_THROWS_AS(generate(spec, gazetteer()), ConfigError);
  spec = SynthSpec{};
  spec.obfuscation_rate = 1.5;
  CHECK_THROWS_AS(spec.validate(), ConfigError);
  spec = SynthSpec{};
  spec.n_ads = 0;
  CHECK_THROWS_AS(spec.validate(), ConfigError);
}

TEST_CASE("ground truth round trip") {
  SynthSpec spec;
  spec.n_ads = 200;
  const auto corpus = generate(spec, gazetteer());
  const auto json = ground_truth_to_json(corpus.truth);
  CHECK(ground_truth_to_json(ground_truth_from_json(json)) == json);
}

TEST_CASE("the pipeline recovers planted truth") {
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    SynthSpec spec;
    spec.n_ads = 600;
    spec.seed = seed;
    spec.obfuscation_rate = 0.6;
    const auto corpus = generate(spec, gazetteer());
    const auto r = recover(corpus);

    std::set<std::vector<std::string>> got, want;
    for (const auto& c : r.clusters) got.insert(c.member_ids);
    for (const auto& c : corpus.truth.clusters) want.insert(c.member_ids);
    CHECK(got == want);

    std::size_t mismatched = 0;
    for (const auto& [ad, keys] : corpus.truth.identifiers) {
      std::vector<std::string> found;
      for (const auto& id : r.identifiers.at(ad)) found.push_back(id.key());
      std::sort(found.begin(), found.end());
      auto expected = keys;
      std::sort(expected.begin(), expected.end());
      if (found != expected) ++mismatched;
    }
    for (const auto& [ad, ids] : r.identifiers) {
      if (!ids.empty() && !corpus.truth.identifiers.count(ad)) ++mismatched;
    }
    CHECK(mismatched == 0);

    std::set<std::vector<std::string>> comps, planted;
    for (const auto& c : r.graph.components) {
      std::vector<std::string> ids;
      for (auto n : c) ids.push_back(r.graph.nodes[n]);
      comps.insert(ids);
    }
    for (const auto& c : corpus.truth.components) planted.insert(c.members);
    CHECK(comps == planted);
  }
}

TEST_CASE("heavy-tailed sizes are mostly singletons with a few large components") {
  SynthSpec spec;
  spec.n_ads = 20000;
  const auto corpus = generate(spec, gazetteer());
  std::size_t single = 0, largest = 0;
  for (const auto& c : corpus.truth.components) {
    if (c.members.size() == 1) ++single;
    largest = std::max(largest, c.members.size());
  }
  CHECK(single * 2 > corpus.truth.components.size());
  CHECK(largest >= 5);
  CHECK(largest * 10 <= spec.canonical_count() * 3);
  std::size_t positives = 0;
  for (const auto& c : corpus.truth.components) positives += c.htrp_label;
  CHECK(positives > 0);
  CHECK(positives < corpus.truth.components.size());
}
