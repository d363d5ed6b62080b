#include "mil/pipeline/experiments.hpp"

#include "mil/errors.hpp"
#include "mil/pipeline/report.hpp"

namespace mil {

SynthSpec synth_fixture(const std::string& name) {
  SynthSpec s;
  s.n_bags = 2000;
  s.min_patches = 24;
  s.max_patches = 48;
  s.d_kv = 64;
  s.positive_rate = 0.05;
  s.signal_strength = 5.0;
  if (name == "strong") return s;
  if (name == "sparse") {
    s.positive_rate = 0.03;
    return s;
  }
  if (name == "null") {
    s.signal_strength = 0.0;
    return s;
  }
  throw ParameterError("unknown synthetic fixture '" + name + "'");
}

std::vector<std::string> synth_fixture_names() { return {"strong", "sparse", "null"}; }

TrainConfig fixture_train_config(AggregatorKind kind) {
  TrainConfig cfg;
  cfg.task = "SYNTH";
  cfg.model.kind = kind;
  cfg.model.d_kv = 64;
  return cfg;
}

ExperimentResult run_variants(const Manifest& manifest, std::span<const Variant> variants, const RunOptions& opts) {
  ExperimentResult out;
  for (const auto& v : variants) {
    RunOptions o = opts;
    if (opts.log) o.log = [&](const std::string& line) { opts.log(v.name + " " + line); };
    out.names.push_back(v.name);
    out.reports.push_back(crossval(manifest, v.config, o));
  }
  out.table = format_auroc_table(out.reports, out.names);
  return out;
}

std::vector<Variant> architecture_variants(const TrainConfig& base) {
  std::vector<Variant> out;
  for (auto kind : {AggregatorKind::encoder, AggregatorKind::vanilla_decoder, AggregatorKind::asym_decoder}) {
    TrainConfig c = base;
    c.model.kind = kind;
    out.push_back({display_name(kind), c});
  }
  return out;
}

std::vector<Variant> tissue_variants(const TrainConfig& base, std::size_t max_patches) {
  TrainConfig plain = base;
  plain.model.tissue_encoding = false;
  plain.sampling.stratified = false;
  plain.sampling.n_target = std::max(base.sampling.n_target, max_patches);
  TrainConfig strat = base;
  strat.model.tissue_encoding = true;
  strat.sampling.stratified = true;
  strat.sampling.n_target = plain.sampling.n_target;
  return {{"All patches, no strat.", plain}, {"All patches, stratified", strat}};
}

}  // namespace mil
