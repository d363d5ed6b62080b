#include "mil/cli/commands.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <iostream>
#include <optional>

#include "mil/cli/bench_suite.hpp"
#include "mil/cli/gradcheck_suite.hpp"
#include "mil/data/errors.hpp"
#include "mil/data/manifest.hpp"
#include "mil/data/synth.hpp"
#include "mil/model/checkpoint.hpp"
#include "mil/pipeline/auroc.hpp"
#include "mil/pipeline/crossval.hpp"
#include "mil/pipeline/experiments.hpp"
#include "mil/pipeline/report.hpp"

namespace mil::cli {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

// Raised for flag combinations CLI11 cannot express; mapped to exit code 2.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Flags {
  std::string spec, fixture, manifest, config, checkpoint, bag, out, task;
  std::vector<std::string> tasks;
  std::optional<std::uint64_t> seed;
  std::size_t jobs = 1;
  std::size_t threads = 1;
  std::size_t repeats = 3;
  std::size_t patches = 512;
  std::vector<std::size_t> d_kv = {768, 1536};
  bool quick = false;
  bool verbose = false;
};

TrainConfig config_from(const Flags& f) {
  TrainConfig cfg = f.config.empty() ? fixture_train_config() : load_train_config(f.config);
  if (f.seed) cfg.seed = *f.seed;
  if (!f.task.empty()) cfg.task = f.task;
  return cfg;
}

RunOptions run_options(const Flags& f, std::ostream& err) {
  RunOptions o;
  o.jobs = f.jobs;
  o.threads = f.threads;
  if (f.verbose) o.log = [&err](const std::string& line) { err << line << '\n'; };
  return o;
}

int cmd_synth(const Flags& f, std::ostream& out) {
  if (f.spec.empty() == f.fixture.empty()) throw UsageError("synth: give exactly one of --spec or --fixture");
  const SynthSpec spec = f.spec.empty() ? synth_fixture(f.fixture) : load_synth_spec(f.spec);
  const auto manifest = synth_generate(spec, f.seed.value_or(0), f.out);
  out << "wrote " << spec.n_bags << " bags (" << spec.positive_count() << " positive) to " << manifest.string()
      << '\n';
  return kExitOk;
}

int cmd_train(const Flags& f, std::ostream& out, std::ostream& err) {
  const TrainConfig cfg = config_from(f);
  const Manifest manifest = load_manifest(f.manifest);
  const auto result = train_task(manifest, cfg, run_options(f, err));
  const std::string hash = result.report.at("config_hash").get<std::string>();
  const fs::path ckpt = fs::path(f.out) / ("model-" + hash + ".ckpt");
  fs::create_directories(f.out);
  save_checkpoint(ckpt, result.model);
  const fs::path report = fs::path(f.out) / ("train-" + hash + ".json");
  write_text_file(report, result.report.dump(2) + "\n");
  out << "train AUROC " << result.report.at("train_auroc").get<double>() << " on "
      << result.report.at("n_bags").get<std::size_t>() << " bags\n"
      << "checkpoint " << ckpt.string() << "\nreport " << report.string() << '\n';
  return kExitOk;
}

int cmd_crossval(const Flags& f, std::ostream& out, std::ostream& err) {
  const TrainConfig cfg = config_from(f);
  const Manifest manifest = load_manifest(f.manifest);
  const std::vector<std::string> tasks = f.tasks.empty() ? std::vector<std::string>{cfg.task} : f.tasks;
  const EvalReport report = crossval(manifest, cfg, tasks, run_options(f, err));
  const auto files = write_report(f.out, report);
  out << format_auroc_table(std::span<const EvalReport>(&report, 1)) << '\n'
      << format_fold_table(report) << "\nreport " << files.json.string() << '\n';
  return kExitOk;
}

int cmd_eval(const Flags& f, std::ostream& out) {
  const Manifest manifest = load_manifest(f.manifest);
  const MilModel model = load_checkpoint(f.checkpoint);
  if (model.config().d_kv != manifest.d_kv()) {
    throw ShapeMismatchError("checkpoint d_kv " + std::to_string(model.config().d_kv) + " differs from manifest d_kv " +
                             std::to_string(manifest.d_kv()));
  }
  const std::string task = f.task.empty() ? "SYNTH" : f.task;
  const auto bags = open_bags(manifest, task);
  std::vector<std::size_t> idx(bags.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  SamplingConfig sampling;
  sampling.n_target = f.patches;
  const auto scores = score_bags(model, bags, idx, sampling, f.seed.value_or(0), f.threads);
  const double value = auroc(scores, bag_labels(bags));
  json report = {{"checkpoint", fs::path(f.checkpoint).filename().string()},
                 {"task", task},
                 {"n_bags", bags.size()},
                 {"auroc", value}};
  json per_bag = json::array();
  for (std::size_t i = 0; i < bags.size(); ++i) {
    per_bag.push_back({{"bag_id", bags[i].id()}, {"label", bags[i].label()}, {"logit", scores[i]}});
  }
  report["bags"] = per_bag;
  if (!f.out.empty()) {
    write_text_file(fs::path(f.out) / ("eval-" + config_hash(report) + ".json"), report.dump(2) + "\n");
  }
  out << "AUROC " << value << " on " << bags.size() << " bags (task " << task << ")\n";
  return kExitOk;
}

int cmd_gradcheck(const Flags& f, std::ostream& out) {
  GradcheckSuiteOptions opts;
  opts.shape_scale = !f.quick;
  opts.seed = f.seed.value_or(0);
  const auto cases = run_gradcheck_suite(opts);
  out << format_gradcheck(cases);
  bool ok = true;
  double worst = 0.0;
  for (const auto& c : cases) {
    ok = ok && c.pass();
    worst = std::max(worst, c.result.max_rel_error);
  }
  out << (ok ? "all pass" : "FAILED") << ", max rel. err " << worst << " (tolerance " << kGradcheckTolerance
      << ")\n";
  return ok ? kExitOk : kExitFailure;
}

int cmd_bench(const Flags& f, std::ostream& out) {
  BenchOptions opts;
  opts.d_kv = f.d_kv;
  opts.n_patches = f.patches;
  opts.repeats = f.repeats;
  opts.seed = f.seed.value_or(0);
  const auto rows = run_bench(opts);
  out << "patches per bag: " << opts.n_patches << ", repeats: " << opts.repeats << '\n' << format_bench(rows);
  for (const auto& r : rows) {
    if (r.parameters != r.expected_parameters) return kExitFailure;
  }
  return kExitOk;
}

int cmd_inspect(const Flags& f, std::ostream& out) {
  const Manifest manifest = load_manifest(f.manifest);
  const MilModel model = load_checkpoint(f.checkpoint);
  const auto& rec = manifest.record(f.bag);
  std::string task = f.task;
  if (task.empty()) {
    for (const auto& [t, v] : rec.labels) {
      if (v) {
        task = t;
        break;
      }
    }
  }
  const BagHandle bag(manifest, f.bag, task);
  const Tensor emb = bag.all_embeddings();
  const auto& tissue = bag.tissue();
  const std::span<const TissueLabel> labels =
      model.config().tissue_encoding ? std::span<const TissueLabel>(tissue) : std::span<const TissueLabel>();
  json maps = json::array();
  for (const auto& m : model.attention_maps(emb, labels)) {
    json rows = json::array();
    for (std::size_t r = 0; r < m.weights.rows(); ++r) {
      const auto row = m.weights.row(r);
      rows.push_back(std::vector<double>(row.begin(), row.end()));
    }
    maps.push_back({{"name", m.name}, {"weights", rows}});
  }
  std::vector<std::string> tissue_names;
  for (auto t : tissue) tissue_names.emplace_back(to_string(t));
  const json dump = {{"bag_id", f.bag},
                     {"label", bag.label()},
                     {"logit", model.predict(emb, labels)},
                     {"tissue", tissue_names},
                     {"attention", maps}};
  if (f.out.empty()) {
    out << dump.dump(2) << '\n';
  } else {
    write_text_file(f.out, dump.dump(2) + "\n");
    out << "wrote " << f.out << '\n';
  }
  return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Multiple-instance learning toolkit for patch-embedding bags", "mil"};
  app.require_subcommand(1, 1);
  Flags f;

  auto add_seed = [&](CLI::App* c) { c->add_option("--seed", f.seed, "Root seed for every random stream"); };
  auto add_threads = [&](CLI::App* c) {
    c->add_option("--threads", f.threads, "Worker threads per training run (results do not depend on it)")
        ->check(CLI::PositiveNumber);
  };

  auto* synth = app.add_subcommand("synth", "Generate a synthetic dataset");
  synth->add_option("--spec", f.spec, "Synthetic spec (JSON)")->check(CLI::ExistingFile);
  synth->add_option("--fixture", f.fixture, "Built-in spec: strong, sparse or null");
  synth->add_option("--out", f.out, "Output directory")->required();
  add_seed(synth);

  auto* train = app.add_subcommand("train", "Train on every labeled bag and save a checkpoint");
  train->add_option("--manifest", f.manifest, "Manifest (JSONL)")->required()->check(CLI::ExistingFile);
  train->add_option("--config", f.config, "Train config (JSON); defaults to the fixture config")
      ->check(CLI::ExistingFile);
  train->add_option("--task", f.task, "Task name (overrides the config)");
  train->add_option("--out", f.out, "Output directory")->required();
  add_seed(train);
  add_threads(train);
  train->add_flag("-v,--verbose", f.verbose, "Log per-epoch progress to stderr");

  auto* cv = app.add_subcommand("crossval", "Stratified k-fold cross-validation");
  cv->add_option("--manifest", f.manifest, "Manifest (JSONL)")->required()->check(CLI::ExistingFile);
  cv->add_option("--config", f.config, "Train config (JSON); defaults to the fixture config")
      ->check(CLI::ExistingFile);
  cv->add_option("--task", f.tasks, "Task name(s); defaults to the config task");
  cv->add_option("--out", f.out, "Report directory")->required();
  cv->add_option("--jobs", f.jobs, "Folds trained concurrently")->check(CLI::PositiveNumber);
  add_seed(cv);
  add_threads(cv);
  cv->add_flag("-v,--verbose", f.verbose, "Log per-epoch progress to stderr");

  auto* ev = app.add_subcommand("eval", "Score a checkpoint on a manifest");
  ev->add_option("--manifest", f.manifest, "Manifest (JSONL)")->required()->check(CLI::ExistingFile);
  ev->add_option("--checkpoint", f.checkpoint, "Checkpoint file")->required()->check(CLI::ExistingFile);
  ev->add_option("--task", f.task, "Task name (default SYNTH)");
  ev->add_option("--n-target", f.patches, "Patches per bag (larger bags are subsampled)")
      ->check(CLI::PositiveNumber);
  ev->add_option("--out", f.out, "Directory for a per-bag JSON report");
  add_seed(ev);
  add_threads(ev);

  auto* gc = app.add_subcommand("gradcheck", "Finite-difference check of every aggregator");
  gc->add_flag("--quick", f.quick, "Skip the d_kv = 1536 cases");
  add_seed(gc);

  auto* bench = app.add_subcommand("bench", "Parameter counts, latency and memory per aggregator");
  bench->add_option("--d-kv", f.d_kv, "Embedding widths")->check(CLI::PositiveNumber);
  bench->add_option("--patches", f.patches, "Patches per bag")->check(CLI::PositiveNumber);
  bench->add_option("--repeats", f.repeats, "Timed repeats")->check(CLI::PositiveNumber);
  add_seed(bench);

  auto* inspect = app.add_subcommand("inspect", "Dump attention weights for one bag");
  inspect->add_option("--manifest", f.manifest, "Manifest (JSONL)")->required()->check(CLI::ExistingFile);
  inspect->add_option("--checkpoint", f.checkpoint, "Checkpoint file")->required()->check(CLI::ExistingFile);
  inspect->add_option("--bag", f.bag, "Bag id")->required();
  inspect->add_option("--task", f.task, "Task whose label to show");
  inspect->add_option("--out", f.out, "Write JSON here instead of stdout");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp& e) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "mil: " << e.what() << '\n';
    if (auto* sub = app.get_subcommands().empty() ? nullptr : app.get_subcommands().front()) {
      err << sub->help();
    }
    return kExitUsage;
  }

  try {
    const auto* sub = app.get_subcommands().front();
    const std::string name = sub->get_name();
    if (name == "synth") return cmd_synth(f, out);
    if (name == "train") return cmd_train(f, out, err);
    if (name == "crossval") return cmd_crossval(f, out, err);
    if (name == "eval") return cmd_eval(f, out);
    if (name == "gradcheck") return cmd_gradcheck(f, out);
    if (name == "bench") return cmd_bench(f, out);
    if (name == "inspect") return cmd_inspect(f, out);
    throw UsageError("unknown command " + name);
  } catch (const UsageError& e) {
    err << "mil: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "mil: " << e.what() << '\n';
    return kExitFailure;
  }
}

int run(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return run(args, std::cout, std::cerr);
}

}  // namespace mil::cli
