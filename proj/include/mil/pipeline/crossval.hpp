#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "mil/data/manifest.hpp"
#include "mil/pipeline/trainer.hpp"

namespace mil {

struct FoldResult {
  std::size_t fold = 0;
  std::size_t n_train = 0;
  std::size_t n_val = 0;
  std::size_t val_positives = 0;
  double auroc = 0.0;  // validation AUROC of the selected epoch
  std::size_t best_epoch = 0;
  std::vector<EpochLog> history;
  double seconds = 0.0;
};

struct TaskResult {
  std::string task;
  std::vector<FoldResult> folds;
  double mean_auroc = 0.0;
};

struct EvalReport {
  std::string method;
  nlohmann::json config;  // resolved TrainConfig
  std::string config_hash;
  std::uint64_t seed = 0;
  std::vector<TaskResult> tasks;
  double mean_auroc = 0.0;  // over tasks
  double seconds = 0.0;
};

// Stratified k-fold cross-validation of cfg on each task (default: cfg.task).
// Fold f trains on the other folds, selects its epoch on fold f and reports
// that epoch's AUROC on fold f.
EvalReport crossval(const Manifest& manifest, const TrainConfig& cfg, std::span<const std::string> tasks,
                    const RunOptions& opts = {});
EvalReport crossval(const Manifest& manifest, const TrainConfig& cfg, const RunOptions& opts = {});

struct TrainTaskResult {
  MilModel model;
  nlohmann::json report;  // deterministic fields only
  double seconds = 0.0;
};

// Trains on every bag labeled for cfg.task (no held-out data) and reports the
// final model's AUROC on the training bags.
TrainTaskResult train_task(const Manifest& manifest, const TrainConfig& cfg, const RunOptions& opts = {});

// cfg with model.d_kv set from the manifest, validated.
TrainConfig resolve_config(const TrainConfig& cfg, const Manifest& manifest);

}  // namespace mil
