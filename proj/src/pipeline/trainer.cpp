#include "mil/pipeline/trainer.hpp"

#include <omp.h>

#include <cmath>
#include <exception>
#include <numeric>
#include <sstream>

#include "mil/errors.hpp"
#include "mil/pipeline/auroc.hpp"
#include "mil/pipeline/loss.hpp"
#include "mil/pipeline/optimizer.hpp"

namespace mil {
namespace {

int worker_count(std::size_t threads) { return static_cast<int>(std::max<std::size_t>(1, threads)); }

void rethrow_first(const std::vector<std::exception_ptr>& errors) {
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

std::span<const TissueLabel> model_tissue(const MilModel& model, const BagView& view) {
  if (!model.config().tissue_encoding) return {};
  return view.tissue;
}

}  // namespace

std::vector<BagHandle> open_bags(const Manifest& manifest, const std::string& task) {
  std::vector<BagHandle> bags;
  for (const auto& id : manifest.labeled_bags(task)) bags.emplace_back(manifest, id, task);
  if (bags.empty()) throw InputError("no bags labeled for task '" + task + "'");
  return bags;
}

std::vector<int> bag_labels(std::span<const BagHandle> bags) {
  std::vector<int> labels;
  labels.reserve(bags.size());
  for (const auto& b : bags) labels.push_back(b.label());
  return labels;
}

BagView sample_view(const BagHandle& bag, const SamplingConfig& sampling, Rng& rng) {
  const auto idx = sampling.stratified
                       ? stratified_sample(std::span<const TissueLabel>(bag.tissue()), sampling.n_target,
                                           sampling.ratios, rng)
                       : uniform_sample(bag.size(), sampling.n_target, rng);
  return {bag.embeddings(idx), bag.tissue_at(idx)};
}

std::vector<double> score_bags(const MilModel& model, std::span<const BagHandle> bags,
                               std::span<const std::size_t> idx, const SamplingConfig& sampling, std::uint64_t seed,
                               std::size_t threads) {
  std::vector<double> scores(idx.size(), 0.0);
  std::vector<std::exception_ptr> errors(idx.size());
#pragma omp parallel for num_threads(worker_count(threads)) schedule(dynamic)
  for (std::size_t i = 0; i < idx.size(); ++i) {
    try {
      const BagHandle& bag = bags[idx[i]];
      Rng rng(derive_seed(seed, "eval/" + bag.id()));
      const BagView view = sample_view(bag, sampling, rng);
      scores[i] = model.predict(view.embeddings, model_tissue(model, view));
    } catch (...) {
      errors[i] = std::current_exception();
    }
  }
  rethrow_first(errors);
  return scores;
}

TrainOutcome train_model(std::span<const BagHandle> bags, std::span<const std::size_t> train,
                         std::span<const std::size_t> val, const TrainConfig& cfg, std::uint64_t run_seed,
                         const RunOptions& opts) {
  cfg.validate();
  if (train.empty()) throw InputError("train_model: empty training set");
  for (auto i : train) {
    if (i >= bags.size()) throw InputError("train_model: bag index out of range");
  }

  TrainConfig resolved = cfg;
  resolved.model.d_kv = bags[train.front()].dim();
  MilModel model(resolved.model, derive_seed(run_seed, "init"));
  ParameterStore& store = model.parameters();
  AdamW optimizer(cfg.adamw);

  const int workers = worker_count(opts.threads);
  std::vector<GradBuffer> buffers(static_cast<std::size_t>(workers), store.zero_grads());
  std::vector<int> val_labels;
  for (auto i : val) val_labels.push_back(bags[i].label());

  TrainOutcome out{model, 0, std::nullopt, {}};
  std::optional<ParameterStore> best_values;

  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    const double lr = cosine_lr(static_cast<double>(epoch), cfg.schedule());
    const std::string tag = "epoch/" + std::to_string(epoch);
    std::vector<std::size_t> order(train.begin(), train.end());
    Rng(derive_seed(run_seed, tag + "/order")).shuffle(order);

    double loss_sum = 0.0;
    for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
      const std::size_t stop = std::min(order.size(), start + cfg.batch_size);
      const double inv_batch = 1.0 / static_cast<double>(stop - start);
      store.zero_accumulated();
      for (std::size_t wave = start; wave < stop; wave += static_cast<std::size_t>(workers)) {
        const std::size_t n = std::min(stop - wave, static_cast<std::size_t>(workers));
        std::vector<double> losses(n, 0.0);
        std::vector<std::exception_ptr> errors(n);
#pragma omp parallel for num_threads(workers) schedule(static, 1)
        for (std::size_t s = 0; s < n; ++s) {
          try {
            const BagHandle& bag = bags[order[wave + s]];
            const std::string bag_tag = tag + "/bag/" + bag.id();
            Rng sample_rng(derive_seed(run_seed, bag_tag + "/sample"));
            Rng dropout_rng(derive_seed(run_seed, bag_tag + "/dropout"));
            const BagView view = sample_view(bag, cfg.sampling, sample_rng);
            const auto trace = model.forward(view.embeddings, model_tissue(model, view), Mode::train, dropout_rng);
            const LossValue lv = bce_with_logits(trace.logit, bag.label(), cfg.pos_weight);
            if (!std::isfinite(lv.loss)) {
              std::ostringstream msg;
              msg << "non-finite loss at epoch " << epoch << " on bag '" << bag.id() << "' (logit " << trace.logit
                  << ")";
              throw TrainingError(msg.str());
            }
            losses[s] = lv.loss;
            for (auto& g : buffers[s]) g.fill(0.0);
            model.backward(trace, lv.dlogit, buffers[s]);
          } catch (...) {
            errors[s] = std::current_exception();
          }
        }
        rethrow_first(errors);
        for (std::size_t s = 0; s < n; ++s) {
          store.accumulate(buffers[s], inv_batch);
          loss_sum += losses[s];
        }
      }
      optimizer.step(store, lr);
    }

    EpochLog log{epoch, lr, loss_sum / static_cast<double>(order.size()), std::nullopt};
    if (!val.empty()) {
      const auto scores = score_bags(model, bags, val, cfg.sampling, run_seed, opts.threads);
      log.val_auroc = auroc(scores, val_labels);
      if (!out.best_val_auroc || *log.val_auroc > *out.best_val_auroc) {
        out.best_val_auroc = log.val_auroc;
        out.best_epoch = epoch;
        best_values = store;
      }
    } else {
      out.best_epoch = epoch;
    }
    if (opts.log) {
      std::ostringstream msg;
      msg << "epoch " << epoch << " lr " << lr << " loss " << log.train_loss;
      if (log.val_auroc) msg << " val_auroc " << *log.val_auroc;
      opts.log(msg.str());
    }
    out.history.push_back(log);
  }

  if (best_values) model.load_values(*best_values);
  out.model = std::move(model);
  return out;
}

}  // namespace mil
