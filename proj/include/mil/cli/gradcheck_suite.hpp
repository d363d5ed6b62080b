#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "mil/model/config.hpp"
#include "mil/numerics/gradcheck.hpp"

namespace mil {

inline constexpr double kGradcheckTolerance = 1e-4;

struct GradcheckCase {
  std::string method;
  AttentionConfig config;
  std::size_t n_patches = 0;
  GradcheckResult result;
  double seconds = 0.0;

  bool pass(double tolerance = kGradcheckTolerance) const { return result.max_rel_error < tolerance; }
};

// Finite-difference check of the full loss (tissue encoding, aggregator,
// train-mode dropout with a fixed mask, BCE) with respect to every parameter
// tensor. max_coords limits the coordinates probed per tensor (0 = all).
GradcheckCase gradcheck_model(const AttentionConfig& cfg, std::size_t n_patches, std::size_t max_coords,
                              std::uint64_t seed);

struct GradcheckSuiteOptions {
  bool shape_scale = true;  // also run every aggregator at d_kv = 1536
  std::uint64_t seed = 0;
};

// Every aggregator at d_q = 64, d_kv = 64, then (optionally) at d_kv = 1536.
std::vector<GradcheckCase> run_gradcheck_suite(const GradcheckSuiteOptions& opts = {});
std::string format_gradcheck(const std::vector<GradcheckCase>& cases, double tolerance = kGradcheckTolerance);

}  // namespace mil
