#include "mil/pipeline/crossval.hpp"

#include <chrono>
#include <exception>

#include "mil/errors.hpp"
#include "mil/pipeline/auroc.hpp"
#include "mil/pipeline/kfold.hpp"
#include "mil/pipeline/report.hpp"

namespace mil {
namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

TaskResult crossval_task(const Manifest& manifest, const TrainConfig& cfg, const std::string& task,
                         const RunOptions& opts) {
  const auto bags = open_bags(manifest, task);
  const auto labels = bag_labels(bags);
  const FoldSplit split = stratified_kfold(labels, cfg.folds, derive_seed(cfg.seed, "crossval/" + task + "/split"));

  TaskResult result;
  result.task = task;
  result.folds.resize(split.k);
  std::vector<std::exception_ptr> errors(split.k);
  const std::size_t jobs = std::max<std::size_t>(1, std::min(opts.jobs, split.k));
  RunOptions inner = opts;
  inner.threads = std::max<std::size_t>(1, opts.threads / jobs);

#pragma omp parallel for num_threads(static_cast<int>(jobs)) schedule(dynamic)
  for (std::size_t f = 0; f < split.k; ++f) {
    try {
      RunOptions fold_opts = inner;
      if (opts.log) {
        fold_opts.log = [&, f](const std::string& line) {
#pragma omp critical(mil_crossval_log)
          opts.log(task + " fold " + std::to_string(f) + ": " + line);
        };
      }
      const auto t0 = Clock::now();
      TrainConfig fold_cfg = cfg;
      fold_cfg.task = task;
      const auto outcome = train_model(bags, split.train[f], split.val[f], fold_cfg,
                                       derive_seed(cfg.seed, "crossval/" + task + "/fold/" + std::to_string(f)),
                                       fold_opts);
      FoldResult& r = result.folds[f];
      r.fold = f;
      r.n_train = split.train[f].size();
      r.n_val = split.val[f].size();
      r.val_positives = split.val_positives[f];
      r.auroc = *outcome.best_val_auroc;
      r.best_epoch = outcome.best_epoch;
      r.history = outcome.history;
      r.seconds = seconds_since(t0);
    } catch (...) {
      errors[f] = std::current_exception();
    }
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  double sum = 0.0;
  for (const auto& r : result.folds) sum += r.auroc;
  result.mean_auroc = sum / static_cast<double>(result.folds.size());
  return result;
}

std::size_t positives(std::span<const BagHandle> bags) {
  std::size_t n = 0;
  for (const auto& b : bags) n += static_cast<std::size_t>(b.label());
  return n;
}

}  // namespace

TrainConfig resolve_config(const TrainConfig& cfg, const Manifest& manifest) {
  TrainConfig out = cfg;
  out.model.d_kv = manifest.d_kv();
  out.validate();
  return out;
}

EvalReport crossval(const Manifest& manifest, const TrainConfig& cfg, std::span<const std::string> tasks,
                    const RunOptions& opts) {
  if (tasks.empty()) throw InputError("crossval: no tasks");
  const auto t0 = Clock::now();
  const TrainConfig resolved = resolve_config(cfg, manifest);
  EvalReport report;
  report.method = display_name(resolved.model.kind);
  report.config = resolved;
  nlohmann::json hashed = {{"config", report.config}, {"tasks", std::vector<std::string>(tasks.begin(), tasks.end())}};
  report.config_hash = config_hash(hashed);
  report.seed = resolved.seed;
  double sum = 0.0;
  for (const auto& task : tasks) {
    report.tasks.push_back(crossval_task(manifest, resolved, task, opts));
    sum += report.tasks.back().mean_auroc;
  }
  report.mean_auroc = sum / static_cast<double>(report.tasks.size());
  report.seconds = seconds_since(t0);
  return report;
}

EvalReport crossval(const Manifest& manifest, const TrainConfig& cfg, const RunOptions& opts) {
  const std::string task = cfg.task;
  return crossval(manifest, cfg, std::span<const std::string>(&task, 1), opts);
}

TrainTaskResult train_task(const Manifest& manifest, const TrainConfig& cfg, const RunOptions& opts) {
  const auto t0 = Clock::now();
  const TrainConfig resolved = resolve_config(cfg, manifest);
  const auto bags = open_bags(manifest, resolved.task);
  std::vector<std::size_t> all(bags.size());
  for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
  auto outcome = train_model(bags, all, {}, resolved, derive_seed(resolved.seed, "train/" + resolved.task), opts);

  const auto scores = score_bags(outcome.model, bags, all, resolved.sampling, resolved.seed, opts.threads);
  nlohmann::json report = {{"method", display_name(resolved.model.kind)},
                           {"config", resolved},
                           {"config_hash", config_hash(nlohmann::json(resolved))},
                           {"seed", resolved.seed},
                           {"task", resolved.task},
                           {"n_bags", bags.size()},
                           {"n_positive", positives(bags)},
                           {"train_auroc", auroc(scores, bag_labels(bags))},
                           {"history", history_json(outcome.history)}};
  return {std::move(outcome.model), std::move(report), seconds_since(t0)};
}

}  // namespace mil
