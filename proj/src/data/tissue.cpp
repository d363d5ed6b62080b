#include "mil/data/tissue.hpp"

#include <cmath>
#include <string>

#include "mil/errors.hpp"

namespace mil {

TissueLabel dominant_class(const TissueFractions& fractions) {
  const auto f = fractions.as_array();
  double total = 0.0;
  for (double v : f) {
    if (!std::isfinite(v) || v < -kSimplexTolerance || v > 1.0 + kSimplexTolerance) {
      throw InputError("tissue fractions must lie in [0,1], got " + std::to_string(v));
    }
    total += v;
  }
  if (std::abs(total - 1.0) > kSimplexTolerance) {
    throw InputError("tissue fractions must sum to 1, got " + std::to_string(total));
  }
  for (std::size_t c = 0; c < f.size(); ++c) {
    if (f[c] > 0.5) return static_cast<TissueLabel>(c);
  }
  // Strict comparison keeps the earlier (higher-priority) class on ties.
  std::size_t best = 0;
  for (std::size_t c = 1; c < f.size(); ++c) {
    if (f[c] > f[best]) best = c;
  }
  return static_cast<TissueLabel>(best);
}

TissueLabel tissue_from_code(std::uint8_t code) {
  if (!is_valid_tissue_code(code)) throw InputError("unknown tissue code " + std::to_string(code));
  return static_cast<TissueLabel>(code);
}

}  // namespace mil
