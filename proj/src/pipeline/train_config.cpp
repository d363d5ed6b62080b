#include "mil/pipeline/train_config.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <vector>

#include "mil/data/errors.hpp"
#include "mil/errors.hpp"
#include "mil/numerics/rng.hpp"

namespace mil {

using nlohmann::json;

void TrainConfig::validate() const {
  auto fail = [](const std::string& m) { throw ParameterError("train config: " + m); };
  if (!(lr > 0.0) || !std::isfinite(lr)) fail("lr must be positive");
  adamw.validate();
  schedule().validate();
  if (batch_size == 0) fail("batch_size must be >= 1");
  if (epochs == 0) fail("epochs must be >= 1");
  if (folds < 2) fail("folds must be >= 2");
  if (!(pos_weight > 0.0)) fail("pos_weight must be positive");
  if (task.empty()) fail("task must be non-empty");
  if (sampling.n_target == 0) fail("sampling.n_target must be >= 1");
  double sum = 0.0;
  for (double r : sampling.ratios) {
    if (!(r >= 0.0)) fail("sampling ratios must be >= 0");
    sum += r;
  }
  if (!(sum > 0.0)) fail("sampling ratios must not all be zero");
  model.validate();
}

void to_json(json& j, const TrainConfig& c) {
  j = json{{"lr", c.lr},
           {"weight_decay", c.adamw.weight_decay},
           {"betas", {c.adamw.beta1, c.adamw.beta2}},
           {"eps", c.adamw.eps},
           {"scheduler", {{"T", c.scheduler_period}, {"eta_min", c.eta_min}}},
           {"batch_size", c.batch_size},
           {"epochs", c.epochs},
           {"folds", c.folds},
           {"pos_weight", c.pos_weight},
           {"seed", c.seed},
           {"task", c.task},
           {"model", c.model},
           {"sampling",
            {{"stratified", c.sampling.stratified},
             {"n_target", c.sampling.n_target},
             {"ratios", c.sampling.ratios}}}};
}

namespace {

void reject_unknown(const json& j, std::initializer_list<const char*> known, const std::string& where) {
  for (const auto& [key, _] : j.items()) {
    bool ok = false;
    for (const char* k : known) ok = ok || key == k;
    if (!ok) throw ParameterError(where + ": unknown field '" + key + "'");
  }
}

}  // namespace

void from_json(const json& j, TrainConfig& c) {
  reject_unknown(j,
                 {"lr", "weight_decay", "betas", "eps", "scheduler", "batch_size", "epochs", "folds", "pos_weight",
                  "seed", "task", "model", "sampling"},
                 "train config");
  const TrainConfig d;
  c.lr = j.value("lr", d.lr);
  c.adamw.weight_decay = j.value("weight_decay", d.adamw.weight_decay);
  if (j.contains("betas")) {
    const auto b = j.at("betas").get<std::vector<double>>();
    if (b.size() != 2) throw ParameterError("train config: betas needs two values");
    c.adamw.beta1 = b[0];
    c.adamw.beta2 = b[1];
  }
  c.adamw.eps = j.value("eps", d.adamw.eps);
  if (j.contains("scheduler")) {
    const auto& s = j.at("scheduler");
    reject_unknown(s, {"T", "eta_min"}, "train config scheduler");
    c.scheduler_period = s.value("T", d.scheduler_period);
    c.eta_min = s.value("eta_min", d.eta_min);
  }
  c.batch_size = j.value("batch_size", d.batch_size);
  c.epochs = j.value("epochs", d.epochs);
  c.folds = j.value("folds", d.folds);
  c.pos_weight = j.value("pos_weight", d.pos_weight);
  c.seed = j.value("seed", d.seed);
  c.task = j.value("task", d.task);
  if (j.contains("model")) c.model = j.at("model").get<AttentionConfig>();
  if (j.contains("sampling")) {
    const auto& s = j.at("sampling");
    reject_unknown(s, {"stratified", "n_target", "ratios"}, "train config sampling");
    c.sampling.stratified = s.value("stratified", d.sampling.stratified);
    c.sampling.n_target = s.value("n_target", d.sampling.n_target);
    c.sampling.ratios = s.value("ratios", d.sampling.ratios);
  }
}

TrainConfig load_train_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw MissingFileError("cannot open train config " + path.string());
  TrainConfig cfg;
  try {
    cfg = json::parse(in).get<TrainConfig>();
  } catch (const json::exception& e) {
    throw ParameterError("train config " + path.string() + ": " + e.what());
  }
  return cfg;
}

std::string config_hash(const json& j) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(fnv1a64(j.dump())));
  return buf;
}

}  // namespace mil
