#pragma once

#include <array>

#include "mil/tissue_label.hpp"

namespace mil {

// Fractional segmentation coverage of one patch; must lie on the simplex.
struct TissueFractions {
  double ca = 0.0;
  double cs = 0.0;
  double bg = 0.0;

  std::array<double, 3> as_array() const noexcept { return {ca, cs, bg}; }
};

inline constexpr double kSimplexTolerance = 1e-9;

// The class covering more than half the patch. If none does, the largest
// class, ties resolved CA > CS > BG. Throws InputError off the simplex.
TissueLabel dominant_class(const TissueFractions& fractions);

TissueLabel tissue_from_code(std::uint8_t code);

}  // namespace mil
