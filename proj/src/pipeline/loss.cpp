#include "mil/pipeline/loss.hpp"

#include <algorithm>
#include <cmath>

#include "mil/errors.hpp"

namespace mil {

double softplus(double x) noexcept { return std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x))); }

double sigmoid(double x) noexcept {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

LossValue bce_with_logits(double logit, int label, double pos_weight) {
  if (label != 0 && label != 1) throw InputError("bce_with_logits: label must be 0 or 1");
  if (!(pos_weight > 0.0)) throw ParameterError("bce_with_logits: pos_weight must be positive");
  const double p = sigmoid(logit);
  if (label == 1) return {pos_weight * softplus(-logit), pos_weight * (p - 1.0)};
  return {softplus(logit), p};
}

}  // namespace mil
