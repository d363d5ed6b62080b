#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace mil {

// Indices refer to positions in the label list passed to stratified_kfold.
struct FoldSplit {
  std::size_t k = 0;
  std::vector<std::vector<std::size_t>> train;
  std::vector<std::vector<std::size_t>> val;
  std::vector<std::size_t> val_positives;
  std::vector<std::size_t> val_negatives;
};

// Positives and negatives are shuffled separately and dealt round-robin to
// the folds; negatives continue from the fold after the last positive so fold
// sizes stay within one of each other. Index lists are sorted.
FoldSplit stratified_kfold(std::span<const int> labels, std::size_t k, std::uint64_t seed);

}  // namespace mil
