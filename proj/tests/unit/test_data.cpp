#include <doctest.h>

#include <algorithm>
#include <set>

#include "../support/oracles.hpp"
#include "../support/temp_dir.hpp"
#include "mil/data/errors.hpp"
#include "mil/data/manifest.hpp"
#include "mil/data/sampling.hpp"
#include "mil/data/synth.hpp"
#include "mil/data/tissue.hpp"
#include "mil/errors.hpp"
#include "mil/pipeline/auroc.hpp"

using namespace mil;
using testing_support::TempDir;

namespace {

SynthSpec tiny_spec() {
  SynthSpec s;
  s.n_bags = 12;
  s.min_patches = 3;
  s.max_patches = 9;
  s.d_kv = 5;
  return s;
}

std::vector<TissueLabel> tissue_with(const ClassCounts& counts, Rng& rng) {
  std::vector<TissueLabel> t;
  for (std::size_t c = 0; c < 3; ++c) t.insert(t.end(), counts[c], static_cast<TissueLabel>(c));
  rng.shuffle(t);
  return t;
}

}  // namespace

TEST_CASE("dominant class") {
  CHECK(dominant_class({0.6, 0.3, 0.1}) == TissueLabel::CA);
  CHECK(dominant_class({0.1, 0.51, 0.39}) == TissueLabel::CS);
  CHECK(dominant_class({0.0, 0.0, 1.0}) == TissueLabel::BG);
  CHECK(dominant_class({0.4, 0.4, 0.2}) == TissueLabel::CA);
  CHECK(dominant_class({0.2, 0.4, 0.4}) == TissueLabel::CS);
  CHECK(dominant_class({0.3, 0.3, 0.4}) == TissueLabel::BG);
  CHECK(dominant_class({0.5, 0.5, 0.0}) == TissueLabel::CA);
  CHECK_THROWS_AS(dominant_class({0.5, 0.5, 0.5}), InputError);
  CHECK_THROWS_AS(dominant_class({1.2, -0.2, 0.0}), InputError);
  CHECK_THROWS_AS(tissue_from_code(3), InputError);
}

TEST_CASE("dominant class is the first maximum on random simplex points (property)") {
  Rng rng(4);
  for (int i = 0; i < 500; ++i) {
    double a = rng.gamma(1.0), b = rng.gamma(1.0), c = rng.gamma(1.0);
    if (i % 5 == 0) b = a;  // force ties
    const double s = a + b + c;
    const TissueFractions f{a / s, b / s, c / s};
    const auto arr = f.as_array();
    const auto best = std::max_element(arr.begin(), arr.end()) - arr.begin();
    CHECK(static_cast<long>(dominant_class(f)) == best);
  }
}

TEST_CASE("quota on a bag with plenty of every class follows the ratios") {
  CHECK(stratified_quota({1000, 1000, 1000}, 100) == ClassCounts{50, 30, 20});
  CHECK(stratified_quota({1000, 1000, 1000}, 512) == ClassCounts{256, 154, 102});
  CHECK(stratified_quota({1000, 1000, 1000}, 7) == ClassCounts{4, 2, 1});
}

TEST_CASE("quota with a single class available takes only that class") {
  CHECK(stratified_quota({40, 0, 0}, 10) == ClassCounts{10, 0, 0});
  CHECK(stratified_quota({0, 0, 3}, 100) == ClassCounts{0, 0, 3});
}

TEST_CASE("quota redistributes a capped class's share by spare capacity") {
  const ClassCounts got = stratified_quota({100, 10, 100}, 100);
  CHECK(got == ClassCounts{58, 10, 32});
  CHECK(got == oracle::quota_exact({100, 10, 100}, 100, {50, 30, 20}));
}

TEST_CASE("quota returns every patch when the bag is small") {
  CHECK(stratified_quota({3, 1, 2}, 512) == ClassCounts{3, 1, 2});
  CHECK(stratified_quota({3, 1, 2}, 6) == ClassCounts{3, 1, 2});
}

TEST_CASE("quota matches the integer oracle on random bags (property)") {
  const std::array<std::array<std::uint64_t, 3>, 4> percents{{{50, 30, 20}, {34, 33, 33}, {100, 0, 0}, {20, 20, 60}}};
  Rng rng(11);
  for (int i = 0; i < 2000; ++i) {
    const auto& pct = percents[i % percents.size()];
    const ClassCounts avail{rng.index(60), rng.index(60), rng.index(60)};
    if (avail[0] + avail[1] + avail[2] == 0) continue;
    const std::size_t n = 1 + rng.index(120);
    const TissueRatios ratios{pct[0] / 100.0, pct[1] / 100.0, pct[2] / 100.0};
    const ClassCounts got = stratified_quota(avail, n, ratios);
    CAPTURE(avail[0]);
    CAPTURE(avail[1]);
    CAPTURE(avail[2]);
    CAPTURE(n);
    CHECK(got == oracle::quota_exact(avail, n, pct));
    std::size_t total = 0;
    for (int c = 0; c < 3; ++c) {
      CHECK(got[c] <= avail[c]);
      total += got[c];
    }
    CHECK(total == std::min<std::size_t>(n, avail[0] + avail[1] + avail[2]));
  }
}

TEST_CASE("stratified sample draws distinct indices with the quota per class (property)") {
  Rng rng(12);
  for (int i = 0; i < 300; ++i) {
    const ClassCounts avail{rng.index(40), rng.index(40), 1 + rng.index(40)};
    const auto tissue = tissue_with(avail, rng);
    const std::size_t n = 1 + rng.index(100);
    const auto idx = stratified_sample(tissue, n, kDefaultTissueRatios, rng);
    CHECK(idx.size() == std::min(n, tissue.size()));
    CHECK(std::set<std::size_t>(idx.begin(), idx.end()).size() == idx.size());
    ClassCounts seen{};
    for (auto j : idx) {
      REQUIRE(j < tissue.size());
      ++seen[static_cast<std::size_t>(tissue[j])];
    }
    CHECK(seen == stratified_quota(avail, n));
  }
}

TEST_CASE("sampling is reproducible from the generator seed") {
  Rng setup(3);
  const auto tissue = tissue_with({30, 20, 10}, setup);
  Rng a(9), b(9), c(10);
  const auto x = stratified_sample(tissue, 20, kDefaultTissueRatios, a);
  CHECK(x == stratified_sample(tissue, 20, kDefaultTissueRatios, b));
  CHECK(x != stratified_sample(tissue, 20, kDefaultTissueRatios, c));
}

TEST_CASE("sampling argument errors") {
  Rng rng(1);
  const std::vector<TissueLabel> t(4, TissueLabel::CA);
  CHECK_THROWS_AS(stratified_sample(t, 0, kDefaultTissueRatios, rng), ParameterError);
  CHECK_THROWS_AS(stratified_sample(std::span<const TissueLabel>(), 4, kDefaultTissueRatios, rng), InputError);
  CHECK_THROWS_AS(stratified_quota({1, 1, 1}, 2, {0.0, 0.0, 0.0}), ParameterError);
  CHECK(stratified_quota({90, 90, 90}, 30, {5.0, 3.0, 2.0}) == stratified_quota({90, 90, 90}, 30));
  CHECK_THROWS_AS(stratified_quota({1, 1, 1}, 2, {-0.5, 1.0, 0.5}), ParameterError);
  const auto u = uniform_sample(10, 4, rng);
  CHECK(std::set<std::size_t>(u.begin(), u.end()).size() == 4);
  CHECK(uniform_sample(3, 10, rng).size() == 3);
}

TEST_CASE("dataset write and load round trip is exact") {
  TempDir dir("roundtrip");
  const auto bags = synth_bags(tiny_spec(), 5);
  const auto path = write_dataset(dir.path(), bags);
  const Manifest m = load_manifest(path);
  CHECK(m.d_kv() == 5);
  REQUIRE(m.records().size() == bags.size());
  for (const auto& bag : bags) {
    const Bag back = load_bag(m, bag.bag_id, "SYNTH");
    CHECK(back.label == bag.label);
    CHECK(back.tissue == bag.tissue);
    CHECK(oracle::max_abs_diff(back.embeddings, bag.embeddings) == 0.0);
    const BagHandle h(m, bag.bag_id, "SYNTH");
    const std::size_t rows[] = {bag.size() - 1, 0};
    const Tensor some = h.embeddings(rows);
    CHECK(some(0, 2) == bag.embeddings(bag.size() - 1, 2));
    CHECK(some(1, 4) == bag.embeddings(0, 4));
  }
}

TEST_CASE("manifest errors") {
  TempDir dir("errors");
  auto bags = synth_bags(tiny_spec(), 2);
  const auto path = write_dataset(dir.path(), bags);
  const std::string good = testing_support::read_file(path);
  const Manifest m = load_manifest(path);

  CHECK_THROWS_AS(load_manifest(dir / "nope.jsonl"), MissingFileError);
  CHECK_THROWS_AS(m.record("bag_9999"), UnknownBagError);
  CHECK_THROWS_AS(BagHandle(m, "bag_0000", "KRAS"), MissingLabelError);

  SUBCASE("duplicate id") {
    const auto second_line = good.substr(good.find('\n') + 1, good.find('\n', good.find('\n') + 1) - good.find('\n'));
    testing_support::write_file(path, good + second_line);
    CHECK_THROWS_AS(load_manifest(path), FormatError);
  }
  SUBCASE("null label") {
    std::string edited = good;
    const auto pos = edited.find("\"SYNTH\":");
    edited.replace(pos, std::string("\"SYNTH\":0").size(), "\"SYNTH\":null");
    if (edited == good) edited.replace(pos, std::string("\"SYNTH\":1").size(), "\"SYNTH\":null");
    testing_support::write_file(path, edited);
    const Manifest e = load_manifest(path);
    CHECK_THROWS_AS(BagHandle(e, e.records().front().bag_id, "SYNTH"), MissingLabelError);
    CHECK(e.labeled_bags("SYNTH").size() == bags.size() - 1);
  }
  SUBCASE("bad label value") {
    std::string edited = good;
    const auto pos = edited.find("\"SYNTH\":") + 8;
    edited[pos] = '7';
    testing_support::write_file(path, edited);
    CHECK_THROWS_AS(load_manifest(path), FormatError);
  }
  SUBCASE("missing shard") {
    std::filesystem::remove(dir / "shards/bag_0003.emb");
    CHECK_THROWS_AS(load_manifest(path), MissingFileError);
  }
  SUBCASE("bad header") {
    testing_support::write_file(path, good.substr(good.find('\n') + 1));
    CHECK_THROWS_AS(load_manifest(path), FormatError);
  }
  SUBCASE("patch count mismatch names both counts") {
    const auto& bag = bags[1];
    std::vector<TissueLabel> shorter(bag.tissue.begin(), bag.tissue.end() - 1);
    write_tissue_file(dir / "shards/bag_0001.tis", shorter);
    try {
      BagHandle h(m, "bag_0001", "SYNTH");
      FAIL("expected ShapeMismatchError");
    } catch (const ShapeMismatchError& e) {
      const std::string msg = e.what();
      CHECK(msg.find(std::to_string(bag.size())) != std::string::npos);
      CHECK(msg.find(std::to_string(bag.size() - 1)) != std::string::npos);
    }
  }
  SUBCASE("embedding width mismatch") {
    Rng rng(1);
    write_embedding_shard(dir / "shards/bag_0002.emb", oracle::random_tensor({bags[2].size(), 6}, rng));
    CHECK_THROWS_AS(BagHandle(m, "bag_0002", "SYNTH"), ShapeMismatchError);
  }
  SUBCASE("truncated shard") {
    const auto bytes = testing_support::read_file(dir / "shards/bag_0004.emb");
    testing_support::write_file(dir / "shards/bag_0004.emb", bytes.substr(0, bytes.size() - 2));
    CHECK_THROWS_AS(BagHandle(m, "bag_0004", "SYNTH"), FormatError);
  }
}

TEST_CASE("bags are validated before writing") {
  TempDir dir("invalid");
  auto bags = synth_bags(tiny_spec(), 2);
  bags[3].tissue.pop_back();
  CHECK_THROWS_AS(write_dataset(dir.path(), bags), InputError);
  bags = synth_bags(tiny_spec(), 2);
  bags[4].bag_id = bags[0].bag_id;
  CHECK_THROWS_AS(write_dataset(dir.path(), bags), FormatError);
}

TEST_CASE("synthetic output is a pure function of spec and seed") {
  TempDir a("synth-a"), b("synth-b"), c("synth-c");
  synth_generate(tiny_spec(), 21, a.path());
  synth_generate(tiny_spec(), 21, b.path());
  synth_generate(tiny_spec(), 22, c.path());
  CHECK(testing_support::tree_contents(a.path()) == testing_support::tree_contents(b.path()));
  CHECK(testing_support::tree_contents(a.path()) != testing_support::tree_contents(c.path()));
  const SynthSpec back = load_synth_spec(a / "synth_spec.json");
  CHECK(nlohmann::json(back) == nlohmann::json(tiny_spec()));
}

TEST_CASE("synthetic labels and tissue mixture") {
  SynthSpec spec;
  spec.n_bags = 1000;
  spec.d_kv = 4;
  spec.positive_rate = 0.37;
  const auto bags = synth_bags(spec, 8);
  std::size_t pos = 0;
  ClassCounts counts{};
  std::size_t patches = 0;
  for (const auto& bag : bags) {
    pos += static_cast<std::size_t>(bag.label);
    CHECK(bag.size() >= spec.min_patches);
    CHECK(bag.size() <= spec.max_patches);
    const auto c = count_classes(bag.tissue);
    for (int k = 0; k < 3; ++k) counts[k] += c[k];
    patches += bag.size();
  }
  CHECK(pos == 370);
  CHECK(pos == spec.positive_count());
  for (int k = 0; k < 3; ++k) {
    CHECK(std::abs(static_cast<double>(counts[k]) / static_cast<double>(patches) - spec.tissue_mixture[k]) < 0.02);
  }
}

TEST_CASE("planted directions are unit length and mutually orthogonal") {
  SynthSpec spec;
  const auto g = synth_geometry(spec, 3);
  CHECK(std::abs(dot(g.signal_ca, g.signal_ca) - 1.0) < 1e-12);
  CHECK(std::abs(dot(g.signal_cs, g.signal_cs) - 1.0) < 1e-12);
  CHECK(std::abs(dot(g.signal_ca, g.signal_cs)) < 1e-12);
  for (const auto& m : g.tissue_means) {
    CHECK(std::abs(std::sqrt(dot(m, m)) - spec.tissue_separation) < 1e-12);
    CHECK(std::abs(dot(m, g.signal_ca)) < 1e-12);
  }
}

TEST_CASE("strong signal is linearly separable from bag means, null signal is not") {
  for (double strength : {5.0, 0.0}) {
    SynthSpec spec;
    spec.n_bags = 600;
    spec.signal_strength = strength;
    const auto bags = synth_bags(spec, 30);
    std::vector<std::vector<double>> means;
    std::vector<int> labels;
    for (const auto& bag : bags) {
      std::vector<double> m(spec.d_kv, 0.0);
      for (std::size_t r = 0; r < bag.size(); ++r)
        for (std::size_t c = 0; c < spec.d_kv; ++c) m[c] += bag.embeddings(r, c) / static_cast<double>(bag.size());
      means.push_back(std::move(m));
      labels.push_back(bag.label);
    }
    std::vector<std::size_t> fit, held;
    for (std::size_t i = 0; i < bags.size(); ++i) (i % 3 == 0 ? held : fit).push_back(i);
    const auto scores = oracle::bag_mean_lda(means, labels, fit, held);
    std::vector<int> held_labels;
    for (auto i : held) held_labels.push_back(labels[i]);
    const double a = auroc(scores, held_labels);
    CAPTURE(strength);
    if (strength > 0) {
      CHECK(a > 0.95);
    } else {
      CHECK(std::abs(a - 0.5) < 0.12);
    }
  }
}

TEST_CASE("synth spec validation") {
  SynthSpec s;
  s.min_patches = 0;
  CHECK_THROWS_AS(s.validate(), ParameterError);
  s = {};
  s.max_patches = 10;
  CHECK_THROWS_AS(s.validate(), ParameterError);
  s = {};
  s.positive_rate = 1.5;
  CHECK_THROWS_AS(s.validate(), ParameterError);
  nlohmann::json j = SynthSpec{};
  j["bogus"] = 1;
  CHECK_THROWS_AS(j.get<SynthSpec>(), ParameterError);
}
