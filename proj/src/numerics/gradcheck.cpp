#include "mil/numerics/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "mil/errors.hpp"
#include "mil/numerics/rng.hpp"

namespace mil {

GradcheckResult gradcheck(const std::function<double()>& f, std::span<const GradcheckTarget> targets,
                          const GradcheckOptions& options) {
  if (!(options.step > 0.0)) throw ParameterError("gradcheck: step must be positive");
  const double base = f();
  if (const double again = f(); again != base) {
    throw ContractError("gradcheck: loss is not deterministic (" + std::to_string(base) + " vs " +
                        std::to_string(again) + ")");
  }

  Rng rng(options.seed);
  GradcheckResult result;
  for (const auto& target : targets) {
    Tensor& value = *target.value;
    if (!target.analytic->same_shape(value)) {
      throw DimensionError("gradcheck: analytic gradient for " + target.name + " has shape " +
                           shape_string(target.analytic->shape()) + ", value has " + shape_string(value.shape()));
    }
    std::vector<std::size_t> coords(value.size());
    std::iota(coords.begin(), coords.end(), 0);
    if (options.max_coords_per_tensor != 0 && coords.size() > options.max_coords_per_tensor) {
      rng.shuffle(coords);
      coords.resize(options.max_coords_per_tensor);
      std::sort(coords.begin(), coords.end());
    }
    for (std::size_t idx : coords) {
      const double original = value[idx];
      value[idx] = original + options.step;
      const double up = f();
      value[idx] = original - options.step;
      const double down = f();
      value[idx] = original;

      const double numeric = (up - down) / (2.0 * options.step);
      const double analytic = (*target.analytic)[idx];
      const double err =
          std::abs(numeric - analytic) / std::max({1.0, std::abs(numeric), std::abs(analytic)});
      ++result.coords_checked;
      if (err > result.max_rel_error || result.coords_checked == 1) {
        result.max_rel_error = err;
        result.worst_tensor = target.name;
        result.worst_index = idx;
        result.worst_numeric = numeric;
        result.worst_analytic = analytic;
      }
    }
  }

  if (f() != base) throw ContractError("gradcheck: loss changed after restoring parameters");
  return result;
}

GradcheckResult gradcheck(const std::function<double()>& f, ParameterStore& store, const GradBuffer& analytic,
                          const GradcheckOptions& options) {
  if (analytic.size() != store.size()) throw StateError("gradcheck: gradient buffer not aligned with store");
  std::vector<GradcheckTarget> targets;
  targets.reserve(store.size());
  for (std::size_t i = 0; i < store.size(); ++i) {
    targets.push_back({store[i].name, &store[i].value, &analytic[i]});
  }
  return gradcheck(f, targets, options);
}

}  // namespace mil
