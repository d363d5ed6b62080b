#pragma once

#include <cstddef>

#include "mil/model/config.hpp"

namespace mil {

// Closed-form trainable-parameter counts, written out independently of the
// layer construction code so tests can check one against the other.
struct ParameterBreakdown {
  std::size_t tissue = 0;
  std::size_t queries = 0;
  std::size_t per_layer = 0;
  std::size_t layers = 0;  // per_layer * n_layers
  std::size_t pooling = 0;  // ABMIL gated-attention scorer
  std::size_t head = 0;
  std::size_t total = 0;
};

ParameterBreakdown expected_parameters(const AttentionConfig& cfg);

}  // namespace mil
