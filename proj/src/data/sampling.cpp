#include "mil/data/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "mil/errors.hpp"

namespace mil {
namespace {

// Integer split of `total` proportional to `weights`; remainders go to the
// largest fractional parts, ties to the lower index.
ClassCounts apportion(std::size_t total, const std::array<double, kTissueClassCount>& weights) {
  ClassCounts out{};
  const double sum = std::accumulate(weights.begin(), weights.end(), 0.0);
  if (total == 0 || sum <= 0.0) return out;
  std::array<double, kTissueClassCount> frac{};
  std::size_t given = 0;
  for (std::size_t c = 0; c < kTissueClassCount; ++c) {
    const double exact = static_cast<double>(total) * weights[c] / sum;
    out[c] = static_cast<std::size_t>(std::floor(exact));
    frac[c] = exact - static_cast<double>(out[c]);
    given += out[c];
  }
  std::array<std::size_t, kTissueClassCount> order{0, 1, 2};
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return frac[a] > frac[b]; });
  for (std::size_t i = 0; given < total; ++i, ++given) {
    // Only classes with positive weight may receive a remainder unit.
    while (weights[order[i % kTissueClassCount]] <= 0.0) ++i;
    ++out[order[i % kTissueClassCount]];
  }
  return out;
}

void check_ratios(const TissueRatios& ratios) {
  double sum = 0.0;
  for (double r : ratios) {
    if (!std::isfinite(r) || r < 0.0) throw ParameterError("tissue ratios must be finite and non-negative");
    sum += r;
  }
  if (sum <= 0.0) throw ParameterError("tissue ratios must not all be zero");
}

}  // namespace

ClassCounts count_classes(std::span<const TissueLabel> tissue) {
  ClassCounts counts{};
  for (auto t : tissue) ++counts.at(static_cast<std::size_t>(t));
  return counts;
}

ClassCounts stratified_quota(const ClassCounts& available, std::size_t n_target, const TissueRatios& ratios) {
  if (n_target == 0) throw ParameterError("n_target must be at least 1");
  check_ratios(ratios);
  const std::size_t total = std::accumulate(available.begin(), available.end(), std::size_t{0});
  if (total == 0) throw InputError("cannot sample from an empty bag");
  const std::size_t n = std::min(n_target, total);
  if (n == total) return available;

  ClassCounts quota = apportion(n, ratios);
  for (;;) {
    std::size_t shortfall = 0;
    std::array<double, kTissueClassCount> spare{};
    for (std::size_t c = 0; c < kTissueClassCount; ++c) {
      if (quota[c] > available[c]) {
        shortfall += quota[c] - available[c];
        quota[c] = available[c];
      }
      spare[c] = static_cast<double>(available[c] - quota[c]);
    }
    if (shortfall == 0) break;
    const ClassCounts extra = apportion(shortfall, spare);
    for (std::size_t c = 0; c < kTissueClassCount; ++c) quota[c] += extra[c];
  }
  return quota;
}

std::vector<std::size_t> stratified_sample(std::span<const TissueLabel> tissue, std::size_t n_target,
                                           const TissueRatios& ratios, Rng& rng) {
  const ClassCounts quota = stratified_quota(count_classes(tissue), n_target, ratios);
  std::array<std::vector<std::size_t>, kTissueClassCount> by_class;
  for (std::size_t i = 0; i < tissue.size(); ++i) by_class[static_cast<std::size_t>(tissue[i])].push_back(i);

  std::vector<std::size_t> out;
  out.reserve(quota[0] + quota[1] + quota[2]);
  for (std::size_t c = 0; c < kTissueClassCount; ++c) {
    auto& pool = by_class[c];
    rng.shuffle(pool);
    out.insert(out.end(), pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(quota[c]));
  }
  rng.shuffle(out);
  return out;
}

std::vector<std::size_t> stratified_sample(const Bag& bag, std::size_t n_target, const TissueRatios& ratios,
                                           Rng& rng) {
  return stratified_sample(std::span<const TissueLabel>(bag.tissue), n_target, ratios, rng);
}

std::vector<std::size_t> uniform_sample(std::size_t n_patches, std::size_t n_target, Rng& rng) {
  if (n_target == 0) throw ParameterError("n_target must be at least 1");
  if (n_patches == 0) throw InputError("cannot sample from an empty bag");
  std::vector<std::size_t> idx(n_patches);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  rng.shuffle(idx);
  idx.resize(std::min(n_target, n_patches));
  return idx;
}

}  // namespace mil
