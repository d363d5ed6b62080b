#pragma once

#include <span>
#include <string>
#include <vector>

#include "mil/data/synth.hpp"
#include "mil/pipeline/crossval.hpp"

namespace mil {

// Named synthetic datasets used for end-to-end checks. All use d_kv = 64.
//   strong  2000 bags, 5% positive, signal 5 sigma
//   sparse  as strong with 3% positive
//   null    as strong with no signal
SynthSpec synth_fixture(const std::string& name);
std::vector<std::string> synth_fixture_names();

// Training configuration used on the fixtures.
TrainConfig fixture_train_config(AggregatorKind kind = AggregatorKind::asym_decoder);

struct Variant {
  std::string name;
  TrainConfig config;
};

struct ExperimentResult {
  std::vector<std::string> names;
  std::vector<EvalReport> reports;
  std::string table;  // format_auroc_table over all variants
};

ExperimentResult run_variants(const Manifest& manifest, std::span<const Variant> variants,
                              const RunOptions& opts = {});

// TransEnc, TransDec, AsymTransDec on otherwise identical settings.
std::vector<Variant> architecture_variants(const TrainConfig& base);

// "All patches, no strat.": no tissue encoding, uniform patch draws.
// "All patches, stratified": tissue encoding and 50/30/20 draws.
// n_target is raised so that every patch of every bag is used.
std::vector<Variant> tissue_variants(const TrainConfig& base, std::size_t max_patches);

}  // namespace mil
