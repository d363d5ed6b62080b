#pragma once

#include <string>
#include <vector>

#include "mil/numerics/tensor.hpp"
#include "mil/tissue_label.hpp"

namespace mil {

// One slide: its patch embeddings, per-patch tissue labels and the binary
// label for one mutation task.
struct Bag {
  std::string bag_id;
  Tensor embeddings;  // [np, d_kv]
  std::vector<TissueLabel> tissue;
  int label = 0;
  std::string task;

  std::size_t size() const noexcept { return tissue.size(); }
  // Throws InputError on an empty bag, count mismatch, non-finite values or
  // a label outside {0,1}.
  void validate() const;
};

}  // namespace mil
