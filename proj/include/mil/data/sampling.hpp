#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <vector>

#include "mil/data/bag.hpp"
#include "mil/numerics/rng.hpp"
#include "mil/tissue_label.hpp"

namespace mil {

// Target share of each tissue class, indexed CA, CS, BG.
using TissueRatios = std::array<double, kTissueClassCount>;
using ClassCounts = std::array<std::size_t, kTissueClassCount>;

inline constexpr TissueRatios kDefaultTissueRatios = {0.5, 0.3, 0.2};

ClassCounts count_classes(std::span<const TissueLabel> tissue);

// How many patches of each class to draw.
//
//   n = min(n_target, sum(available))
//   1. quota_c = largest-remainder apportionment of n by ratios
//   2. cap each quota at available_c; call the removed amount the shortfall
//   3. hand the shortfall to the classes that still have spare patches, in
//      proportion to spare_c = available_c - quota_c (largest remainder again)
//   4. repeat from 2 until nothing is left over
//
// Largest-remainder ties go to the earlier class (CA, then CS, then BG).
ClassCounts stratified_quota(const ClassCounts& available, std::size_t n_target,
                             const TissueRatios& ratios = kDefaultTissueRatios);

// Draws stratified_quota(...) patches per class without replacement and
// returns their indices in random order. When n_target >= np every index is
// returned (shuffled).
std::vector<std::size_t> stratified_sample(std::span<const TissueLabel> tissue, std::size_t n_target,
                                           const TissueRatios& ratios, Rng& rng);
std::vector<std::size_t> stratified_sample(const Bag& bag, std::size_t n_target, const TissueRatios& ratios,
                                           Rng& rng);

// min(n_target, np) distinct indices, ignoring tissue type.
std::vector<std::size_t> uniform_sample(std::size_t n_patches, std::size_t n_target, Rng& rng);

}  // namespace mil
