#pragma once

#include <cstddef>

#include "mil/numerics/parameter.hpp"

namespace mil {

struct AdamWOptions {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double weight_decay = 0.01;

  void validate() const;
};

// One AdamW update of a single parameter at step t (1-based):
//   w <- w * (1 - lr * wd)
//   m <- b1 m + (1 - b1) g,  v <- b2 v + (1 - b2) g^2
//   w <- w - lr * m_hat / (sqrt(v_hat) + eps)
// Throws StateError when grad or the moments do not match the value's shape.
void adamw_step(Parameter& param, const Tensor& grad, double lr, const AdamWOptions& opts, std::size_t t);

// Applies adamw_step to every parameter using its accumulated_grad.
class AdamW {
 public:
  explicit AdamW(AdamWOptions opts = {});

  void step(ParameterStore& store, double lr);
  std::size_t steps() const noexcept { return t_; }
  const AdamWOptions& options() const noexcept { return opts_; }

 private:
  AdamWOptions opts_;
  std::size_t t_ = 0;
};

}  // namespace mil
