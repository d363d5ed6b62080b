#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "mil/data/bag.hpp"
#include "mil/data/sampling.hpp"

namespace mil {

// Parameters of the synthetic bag generator.
//
// Every patch is drawn from N(mean_t, noise_std^2 I) where mean_t is a fixed
// random vector of length tissue_separation for its tissue type t. In a
// positive bag each CA patch is, with probability signal_fraction, shifted by
// signal_strength along a planted unit direction, and every CS patch is shifted
// by signal_strength / 2 along a second direction orthogonal to the first.
struct SynthSpec {
  std::size_t n_bags = 200;
  std::size_t min_patches = 24;
  std::size_t max_patches = 48;
  std::size_t d_kv = 64;
  double positive_rate = 0.5;
  double signal_strength = 5.0;  // in units of noise_std
  double signal_fraction = 0.2;
  TissueRatios tissue_mixture = {0.5, 0.3, 0.2};
  // Per-bag tissue proportions ~ Dirichlet(concentration * mixture); 0 uses the
  // mixture itself for every bag.
  double mixture_concentration = 20.0;
  double tissue_separation = 1.0;
  double noise_std = 1.0;
  std::string task = "SYNTH";

  void validate() const;  // ParameterError
  std::size_t positive_count() const;
};

void to_json(nlohmann::json& j, const SynthSpec& s);
void from_json(const nlohmann::json& j, SynthSpec& s);
SynthSpec load_synth_spec(const std::filesystem::path& path);

// Planted directions, exposed for tests and oracles.
struct SynthGeometry {
  std::vector<Tensor> tissue_means;  // 3 x [1, d_kv]
  Tensor signal_ca;                  // [1, d_kv], unit
  Tensor signal_cs;                  // [1, d_kv], unit, orthogonal to signal_ca
};
SynthGeometry synth_geometry(const SynthSpec& spec, std::uint64_t seed);

// In-memory dataset. Values are rounded to float32 so a write/load round trip
// reproduces them exactly.
std::vector<Bag> synth_bags(const SynthSpec& spec, std::uint64_t seed);

// Writes the dataset (see write_dataset) plus synth_spec.json; returns the
// manifest path.
std::filesystem::path synth_generate(const SynthSpec& spec, std::uint64_t seed, const std::filesystem::path& dir);

}  // namespace mil
