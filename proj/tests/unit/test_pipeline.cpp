#include <doctest.h>

#include <cmath>
#include <numbers>
#include <set>

#include "../support/oracles.hpp"
#include "../support/temp_dir.hpp"
#include "mil/data/synth.hpp"
#include "mil/errors.hpp"
#include "mil/model/checkpoint.hpp"
#include "mil/pipeline/auroc.hpp"
#include "mil/pipeline/crossval.hpp"
#include "mil/pipeline/kfold.hpp"
#include "mil/pipeline/loss.hpp"
#include "mil/pipeline/optimizer.hpp"
#include "mil/pipeline/report.hpp"
#include "mil/pipeline/schedule.hpp"

using namespace mil;
using testing_support::TempDir;

TEST_CASE("binary cross entropy with logits") {
  CHECK(bce_with_logits(0.0, 1).loss == doctest::Approx(std::numbers::ln2).epsilon(1e-15));
  CHECK(bce_with_logits(0.0, 0).loss == doctest::Approx(std::numbers::ln2).epsilon(1e-15));
  CHECK(bce_with_logits(0.0, 1).dlogit == -0.5);
  CHECK(bce_with_logits(800.0, 0).loss == doctest::Approx(800.0));
  CHECK(bce_with_logits(-800.0, 1).loss == doctest::Approx(800.0));
  CHECK(bce_with_logits(800.0, 1).loss < 1e-300);
  CHECK(std::isfinite(bce_with_logits(-800.0, 1).dlogit));
  CHECK(bce_with_logits(1.3, 1, 3.0).loss == doctest::Approx(3.0 * bce_with_logits(1.3, 1).loss).epsilon(1e-15));
  CHECK(bce_with_logits(1.3, 0, 3.0).loss == bce_with_logits(1.3, 0).loss);
  CHECK_THROWS_AS(bce_with_logits(0.0, 2), InputError);

  Rng rng(7);
  for (int i = 0; i < 200; ++i) {
    const double z = rng.normal(0.0, 4.0);
    const int y = static_cast<int>(rng.index(2));
    const double w = 0.5 + rng.uniform() * 3.0;
    const double h = 1e-5;
    const double fd = (bce_with_logits(z + h, y, w).loss - bce_with_logits(z - h, y, w).loss) / (2 * h);
    CHECK(std::abs(fd - bce_with_logits(z, y, w).dlogit) < 1e-8);
  }
}

TEST_CASE("adamw first step and decoupled decay") {
  AdamWOptions opts;
  Parameter p("w", Tensor::matrix(1, 3, {1.0, -2.0, 0.5}));
  const Tensor g = Tensor::matrix(1, 3, {0.3, -0.1, 0.0});
  adamw_step(p, g, 1e-2, opts, 1);
  // Bias-corrected moments equal g and g^2 after one step.
  const double lr = 1e-2, wd = opts.weight_decay;
  CHECK(p.value(0, 0) == doctest::Approx(1.0 * (1 - lr * wd) - lr * 0.3 / (0.3 + opts.eps)).epsilon(1e-14));
  CHECK(p.value(0, 1) == doctest::Approx(-2.0 * (1 - lr * wd) + lr * 0.1 / (0.1 + opts.eps)).epsilon(1e-14));
  CHECK(p.value(0, 2) == doctest::Approx(0.5 * (1 - lr * wd)).epsilon(1e-14));
  CHECK_THROWS_AS(adamw_step(p, Tensor({1, 2}), lr, opts, 2), StateError);
  CHECK_THROWS_AS(adamw_step(p, g, lr, opts, 0), StateError);
}

TEST_CASE("adamw under a constant gradient moves by about lr per step") {
  AdamWOptions opts;
  opts.weight_decay = 0.0;
  Parameter p("w", Tensor({1, 1}, 0.0));
  const Tensor g({1, 1}, 0.7);
  for (std::size_t t = 1; t <= 500; ++t) {
    const double before = p.value(0, 0);
    adamw_step(p, g, 1e-3, opts, t);
    CHECK(std::abs(before - p.value(0, 0) - 1e-3) < 1e-9);
  }
}

TEST_CASE("adamw with zero gradient only applies weight decay") {
  AdamWOptions opts;
  opts.weight_decay = 0.0;
  Parameter p("w", Tensor::matrix(1, 2, {3.0, -1.0}));
  for (std::size_t t = 1; t <= 5; ++t) adamw_step(p, Tensor({1, 2}), 1e-2, opts, t);
  CHECK(p.value(0, 0) == 3.0);
  CHECK(p.value(0, 1) == -1.0);
  opts.weight_decay = 0.5;
  adamw_step(p, Tensor({1, 2}), 0.1, opts, 6);
  CHECK(p.value(0, 0) == doctest::Approx(3.0 * 0.95).epsilon(1e-15));
}

TEST_CASE("adamw optimizer steps every parameter from the accumulated gradient") {
  ParameterStore store;
  const auto a = store.add("a", Tensor({2, 2}, 1.0));
  const auto b = store.add("b", Tensor({3}, -1.0));
  GradBuffer g = store.zero_grads();
  g[a].fill(1.0);
  g[b].fill(-1.0);
  store.accumulate(g, 0.5);
  AdamW opt;
  opt.step(store, 1e-2);
  CHECK(opt.steps() == 1);
  CHECK(store.value(a)(0, 0) < 1.0);
  CHECK(store.value(b).values()[1] > -1.0);
}

TEST_CASE("cosine schedule") {
  const CosineSchedule s{10.0, 2e-4, 1e-6};
  CHECK(cosine_lr(0.0, s) == 2e-4);
  CHECK(cosine_lr(10.0, s) == 1e-6);
  CHECK(cosine_lr(25.0, s) == 1e-6);
  CHECK(std::abs(cosine_lr(5.0, s) - (2e-4 + 1e-6) / 2) < 1e-18);
  for (int i = 0; i < 100; ++i) CHECK(cosine_lr(i * 0.1, s) >= cosine_lr((i + 1) * 0.1, s));
  for (int i = 0; i < 20; ++i) {
    const double t = i * 0.5;
    const double expect = 1e-6 + 0.5 * (2e-4 - 1e-6) * (1 + std::cos(std::numbers::pi * t / 10.0));
    CHECK(std::abs(cosine_lr(t, s) - expect) < 1e-18);
  }
  CHECK_THROWS_AS(cosine_lr(-1.0, s), ParameterError);
  CHECK_THROWS_AS(cosine_lr(1.0, {0.0, 1e-3, 0.0}), ParameterError);
}

namespace {

std::vector<int> labels_of(std::size_t pos, std::size_t neg, std::uint64_t seed) {
  std::vector<int> y(pos, 1);
  y.insert(y.end(), neg, 0);
  Rng rng(seed);
  rng.shuffle(y);
  return y;
}

void check_partition(const FoldSplit& s, std::span<const int> y) {
  std::vector<int> seen(y.size(), 0);
  for (std::size_t f = 0; f < s.k; ++f) {
    for (auto i : s.val[f]) ++seen[i];
    std::set<std::size_t> v(s.val[f].begin(), s.val[f].end());
    CHECK(s.train[f].size() + s.val[f].size() == y.size());
    for (auto i : s.train[f]) CHECK(v.count(i) == 0);
    std::size_t pos = 0;
    for (auto i : s.val[f]) pos += static_cast<std::size_t>(y[i]);
    CHECK(pos == s.val_positives[f]);
    CHECK(s.val[f].size() - pos == s.val_negatives[f]);
  }
  for (int c : seen) CHECK(c == 1);
}

}  // namespace

TEST_CASE("stratified k-fold") {
  const auto y = labels_of(10, 10, 1);
  const FoldSplit s = stratified_kfold(y, 5, 42);
  check_partition(s, y);
  for (std::size_t f = 0; f < 5; ++f) {
    CHECK(s.val_positives[f] == 2);
    CHECK(s.val_negatives[f] == 2);
  }

  const auto y2 = labels_of(7, 13, 2);
  const FoldSplit s2 = stratified_kfold(y2, 5, 42);
  check_partition(s2, y2);
  std::multiset<std::size_t> pos(s2.val_positives.begin(), s2.val_positives.end());
  std::multiset<std::size_t> neg(s2.val_negatives.begin(), s2.val_negatives.end());
  CHECK(pos == std::multiset<std::size_t>{1, 1, 1, 2, 2});
  CHECK(neg == std::multiset<std::size_t>{2, 2, 3, 3, 3});
  for (std::size_t f = 0; f < 5; ++f) CHECK(s2.val[f].size() == 4);

  CHECK(stratified_kfold(y2, 5, 42).val == s2.val);
  CHECK(stratified_kfold(y2, 5, 43).val != s2.val);
  CHECK_THROWS_AS(stratified_kfold(labels_of(3, 10, 1), 5, 0), InputError);
  CHECK_THROWS_AS(stratified_kfold(labels_of(10, 4, 1), 5, 0), InputError);
  CHECK_THROWS_AS(stratified_kfold(y, 1, 0), ParameterError);
}

TEST_CASE("stratified k-fold balances every class on random label vectors (property)") {
  Rng rng(5);
  for (int i = 0; i < 100; ++i) {
    const std::size_t k = 2 + rng.index(6);
    const std::size_t pos = k + rng.index(30), neg = k + rng.index(30);
    const auto y = labels_of(pos, neg, i);
    const FoldSplit s = stratified_kfold(y, k, i);
    check_partition(s, y);
    const auto [pmin, pmax] = std::minmax_element(s.val_positives.begin(), s.val_positives.end());
    const auto [nmin, nmax] = std::minmax_element(s.val_negatives.begin(), s.val_negatives.end());
    CHECK(*pmax - *pmin <= 1);
    CHECK(*nmax - *nmin <= 1);
  }
}

TEST_CASE("auroc equals the pair-counting definition (property)") {
  for (std::uint64_t seed = 0; seed < 150; ++seed) {
    Rng rng(seed);
    const std::size_t n = 2 + rng.index(60);
    std::vector<double> s(n);
    std::vector<int> y(n);
    for (std::size_t i = 0; i < n; ++i) {
      s[i] = seed % 2 ? static_cast<double>(rng.index(5)) : rng.normal();  // odd seeds: heavy ties
      y[i] = static_cast<int>(rng.index(2));
    }
    y[0] = 0;
    y[1] = 1;
    const double a = auroc(s, y);
    CHECK(a == doctest::Approx(oracle::pair_count_auroc(s, y)).epsilon(1e-15));
    std::vector<double> neg(s);
    for (auto& v : neg) v = -v;
    CHECK(auroc(neg, y) == doctest::Approx(1.0 - a).epsilon(1e-14));
    std::vector<double> shifted(s);
    for (auto& v : shifted) v = 3.0 * v + 1.0;
    CHECK(auroc(shifted, y) == a);
  }
}

TEST_CASE("auroc edge cases") {
  const std::vector<double> s{0.1, 0.4, 0.35, 0.8};
  CHECK(auroc(s, std::vector<int>{0, 0, 1, 1}) == 0.75);
  CHECK(auroc(s, std::vector<int>{0, 1, 0, 1}) == 1.0);
  CHECK(auroc(std::vector<double>{1, 1, 1}, std::vector<int>{0, 1, 1}) == 0.5);
  CHECK_THROWS_AS(auroc(s, std::vector<int>{1, 1, 1, 1}), MetricError);
  CHECK_THROWS_AS(auroc(s, std::vector<int>{0, 1}), InputError);
  CHECK_THROWS_AS(auroc(s, std::vector<int>{0, 1, 2, 1}), InputError);
  CHECK_THROWS_AS(auroc(std::vector<double>{0.1, NAN}, std::vector<int>{0, 1}), InputError);
}

namespace {

TrainConfig tiny_train_config() {
  TrainConfig cfg;
  cfg.model.d_q = 8;
  cfg.model.n_heads = 2;
  cfg.model.n_queries = 2;
  cfg.model.ffn_ratio = 2;
  cfg.batch_size = 8;
  cfg.epochs = 3;
  cfg.scheduler_period = 3;
  cfg.folds = 2;
  cfg.lr = 2e-3;
  cfg.sampling.n_target = 8;
  cfg.seed = 3;
  return cfg;
}

SynthSpec tiny_data_spec() {
  SynthSpec s;
  s.n_bags = 24;
  s.min_patches = 6;
  s.max_patches = 14;
  s.d_kv = 8;
  return s;
}

}  // namespace

TEST_CASE("training config json round trip and validation") {
  const TrainConfig cfg = tiny_train_config();
  const nlohmann::json j = cfg;
  CHECK(nlohmann::json(j.get<TrainConfig>()) == j);
  CHECK(config_hash(j) == config_hash(nlohmann::json(j.get<TrainConfig>())));
  CHECK(config_hash(j).size() == 16);
  nlohmann::json bad = j;
  bad["learning_rate"] = 1;
  CHECK_THROWS_AS(bad.get<TrainConfig>(), ParameterError);
  TrainConfig c = cfg;
  c.batch_size = 0;
  CHECK_THROWS_AS(c.validate(), ParameterError);
  c = cfg;
  c.lr = -1;
  CHECK_THROWS_AS(c.validate(), ParameterError);
}

TEST_CASE("cross-validation is reproducible and independent of thread count") {
  TempDir dir("cv");
  const auto manifest_path = synth_generate(tiny_data_spec(), 4, dir.path());
  const Manifest m = load_manifest(manifest_path);
  const TrainConfig cfg = tiny_train_config();

  const EvalReport a = crossval(m, cfg);
  const EvalReport b = crossval(m, cfg);
  RunOptions two;
  two.threads = 2;
  two.jobs = 2;
  const EvalReport c = crossval(m, cfg, two);
  CHECK(report_json(a).dump() == report_json(b).dump());
  CHECK(report_json(a).dump() == report_json(c).dump());

  REQUIRE(a.tasks.size() == 1);
  CHECK(a.tasks[0].folds.size() == 2);
  double sum = 0.0;
  for (const auto& f : a.tasks[0].folds) {
    CHECK(f.history.size() == 3);
    CHECK(f.best_epoch < 3);
    CHECK(f.auroc == f.history[f.best_epoch].val_auroc.value());
    for (const auto& e : f.history) CHECK(f.auroc >= e.val_auroc.value());
    sum += f.auroc;
  }
  CHECK(a.mean_auroc == doctest::Approx(sum / 2));

  TrainConfig other = cfg;
  other.seed = 4;
  CHECK(report_json(crossval(m, other)).dump() != report_json(a).dump());

  const auto files = write_report(dir / "out", a);
  CHECK(std::filesystem::exists(files.json));
  CHECK(std::filesystem::exists(files.table));
  CHECK(std::filesystem::exists(files.timing));
  CHECK(files.json.filename().string() == "crossval-" + a.config_hash + ".json");
}

TEST_CASE("training on all bags is bit reproducible") {
  TempDir dir("train");
  const Manifest m = load_manifest(synth_generate(tiny_data_spec(), 6, dir.path()));
  const TrainConfig cfg = tiny_train_config();
  const auto a = train_task(m, cfg);
  RunOptions two;
  two.threads = 2;
  const auto b = train_task(m, cfg, two);
  CHECK(serialize_checkpoint(a.model) == serialize_checkpoint(b.model));
  CHECK(a.report.dump() == b.report.dump());
  CHECK(a.model.config().d_kv == 8);
}

TEST_CASE("every aggregator trains without error through the same loop") {
  TempDir dir("kinds");
  const Manifest m = load_manifest(synth_generate(tiny_data_spec(), 7, dir.path()));
  for (auto kind : {AggregatorKind::asym_decoder, AggregatorKind::vanilla_decoder, AggregatorKind::encoder,
                    AggregatorKind::abmil}) {
    TrainConfig cfg = tiny_train_config();
    cfg.model.kind = kind;
    cfg.epochs = 1;
    const EvalReport r = crossval(m, cfg);
    CHECK(r.method == display_name(kind));
    CHECK(r.mean_auroc >= 0.0);
    CHECK(r.mean_auroc <= 1.0);
  }
}

TEST_CASE("auroc table layout") {
  EvalReport r;
  r.method = "AsymTransDec";
  r.tasks = {{"KRAS", {}, 0.7}, {"TP53", {}, 0.8}};
  r.mean_auroc = 0.75;
  const EvalReport reports[] = {r};
  const std::string t = format_auroc_table(reports);
  CHECK(t.find("KRAS") != std::string::npos);
  CHECK(t.find("TP53") < t.find("Mean"));
  CHECK(t.find("0.7500") != std::string::npos);
  CHECK(t.find("AsymTransDec") != std::string::npos);
}
