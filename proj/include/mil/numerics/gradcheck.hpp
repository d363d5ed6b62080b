#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "mil/numerics/parameter.hpp"
#include "mil/numerics/tensor.hpp"

namespace mil {

struct GradcheckOptions {
  double step = 1e-5;
  // 0 checks every coordinate; otherwise a seeded random subset per tensor.
  std::size_t max_coords_per_tensor = 0;
  std::uint64_t seed = 0;
};

struct GradcheckResult {
  double max_rel_error = 0.0;
  std::string worst_tensor;
  std::size_t worst_index = 0;
  double worst_numeric = 0.0;
  double worst_analytic = 0.0;
  std::size_t coords_checked = 0;
};

// A tensor f depends on, and the analytic gradient of f with respect to it.
struct GradcheckTarget {
  std::string name;
  Tensor* value;
  const Tensor* analytic;
};

// Compares analytic gradients against central finite differences of f,
// perturbing each target in place and restoring it exactly afterwards.
// Error per coordinate is |g_fd - g_an| / max(1, |g_fd|, |g_an|).
// Throws ContractError if f is not deterministic.
GradcheckResult gradcheck(const std::function<double()>& f, std::span<const GradcheckTarget> targets,
                          const GradcheckOptions& options = {});

// Convenience form over every tensor of a parameter store; `analytic` is
// index-aligned with the store.
GradcheckResult gradcheck(const std::function<double()>& f, ParameterStore& store, const GradBuffer& analytic,
                          const GradcheckOptions& options = {});

}  // namespace mil
