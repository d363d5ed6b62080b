#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mil/data/manifest.hpp"
#include "mil/model/mil_model.hpp"
#include "mil/pipeline/train_config.hpp"

namespace mil {

struct RunOptions {
  std::size_t threads = 1;  // bag-level workers per training run
  std::size_t jobs = 1;     // folds trained concurrently
  // Progress lines; called from one thread at a time.
  std::function<void(const std::string&)> log;
};

// The bags labeled for `task`, opened for sampling, in manifest order.
std::vector<BagHandle> open_bags(const Manifest& manifest, const std::string& task);
std::vector<int> bag_labels(std::span<const BagHandle> bags);

// Patches and tissue labels actually fed to the model for one pass.
struct BagView {
  Tensor embeddings;
  std::vector<TissueLabel> tissue;
};
BagView sample_view(const BagHandle& bag, const SamplingConfig& sampling, Rng& rng);

struct EpochLog {
  std::size_t epoch = 0;
  double lr = 0.0;
  double train_loss = 0.0;
  std::optional<double> val_auroc;
};

struct TrainOutcome {
  MilModel model;  // parameters from the selected epoch
  std::size_t best_epoch = 0;
  std::optional<double> best_val_auroc;
  std::vector<EpochLog> history;
};

// Trains a fresh model on bags[train]. Each epoch draws a new patch subset per
// bag, shuffles the bag order and takes one AdamW step per batch on the mean
// loss. With a non-empty validation set the epoch with the highest validation
// AUROC is kept (earliest on ties); otherwise the last epoch is.
//
// Results depend only on (bags, indices, cfg, run_seed): per-bag gradients
// are summed in bag order whatever the thread count.
TrainOutcome train_model(std::span<const BagHandle> bags, std::span<const std::size_t> train,
                         std::span<const std::size_t> val, const TrainConfig& cfg, std::uint64_t run_seed,
                         const RunOptions& opts = {});

// Eval-mode logits for bags[idx]. Bags larger than sampling.n_target are
// subsampled with a stream fixed by (seed, bag id).
std::vector<double> score_bags(const MilModel& model, std::span<const BagHandle> bags,
                               std::span<const std::size_t> idx, const SamplingConfig& sampling, std::uint64_t seed,
                               std::size_t threads = 1);

}  // namespace mil
