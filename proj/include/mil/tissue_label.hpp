#pragma once

#include <cstddef>
#include <cstdint>
#include <string_view>

namespace mil {

// Tissue class assigned to each patch. Integer codes are part of the on-disk
// format and must not change.
enum class TissueLabel : std::uint8_t { CA = 0, CS = 1, BG = 2 };

inline constexpr std::size_t kTissueClassCount = 3;

constexpr bool is_valid_tissue_code(std::uint8_t code) noexcept { return code < kTissueClassCount; }

constexpr std::string_view to_string(TissueLabel t) noexcept {
  switch (t) {
    case TissueLabel::CA: return "CA";
    case TissueLabel::CS: return "CS";
    case TissueLabel::BG: return "BG";
  }
  return "?";
}

}  // namespace mil
