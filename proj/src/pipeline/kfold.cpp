#include "mil/pipeline/kfold.hpp"

#include <algorithm>
#include <string>

#include "mil/errors.hpp"
#include "mil/numerics/rng.hpp"

namespace mil {

FoldSplit stratified_kfold(std::span<const int> labels, std::size_t k, std::uint64_t seed) {
  if (k < 2) throw ParameterError("stratified_kfold: k must be at least 2");
  std::vector<std::size_t> pos, neg;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] == 1) {
      pos.push_back(i);
    } else if (labels[i] == 0) {
      neg.push_back(i);
    } else {
      throw InputError("stratified_kfold: labels must be 0 or 1");
    }
  }
  if (pos.size() < k) {
    throw InputError("stratified_kfold: positive class has " + std::to_string(pos.size()) + " samples, need >= " +
                     std::to_string(k));
  }
  if (neg.size() < k) {
    throw InputError("stratified_kfold: negative class has " + std::to_string(neg.size()) + " samples, need >= " +
                     std::to_string(k));
  }
  Rng(derive_seed(seed, "kfold/positive")).shuffle(pos);
  Rng(derive_seed(seed, "kfold/negative")).shuffle(neg);

  FoldSplit split;
  split.k = k;
  split.val.resize(k);
  split.val_positives.assign(k, 0);
  split.val_negatives.assign(k, 0);
  for (std::size_t i = 0; i < pos.size(); ++i) {
    split.val[i % k].push_back(pos[i]);
    ++split.val_positives[i % k];
  }
  for (std::size_t i = 0; i < neg.size(); ++i) {
    const std::size_t f = (pos.size() + i) % k;
    split.val[f].push_back(neg[i]);
    ++split.val_negatives[f];
  }
  split.train.resize(k);
  for (std::size_t f = 0; f < k; ++f) {
    std::sort(split.val[f].begin(), split.val[f].end());
    for (std::size_t g = 0; g < k; ++g) {
      if (g != f) split.train[f].insert(split.train[f].end(), split.val[g].begin(), split.val[g].end());
    }
    std::sort(split.train[f].begin(), split.train[f].end());
  }
  return split;
}

}  // namespace mil
