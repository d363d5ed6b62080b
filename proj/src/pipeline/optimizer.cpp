#include "mil/pipeline/optimizer.hpp"

#include <cmath>

#include "mil/errors.hpp"

namespace mil {

void AdamWOptions::validate() const {
  if (!(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0)) {
    throw ParameterError("AdamW betas must be in [0, 1)");
  }
  if (!(eps > 0.0)) throw ParameterError("AdamW eps must be positive");
  if (!(weight_decay >= 0.0) || !std::isfinite(weight_decay)) throw ParameterError("weight_decay must be >= 0");
}

void adamw_step(Parameter& param, const Tensor& grad, double lr, const AdamWOptions& opts, std::size_t t) {
  if (!grad.same_shape(param.value) || !param.adam_m.same_shape(param.value) ||
      !param.adam_v.same_shape(param.value)) {
    throw StateError("optimizer state for '" + param.name + "' does not match " + shape_string(param.value.shape()));
  }
  if (t == 0) throw StateError("adamw_step: step index is 1-based");
  const double c1 = 1.0 - std::pow(opts.beta1, static_cast<double>(t));
  const double c2 = 1.0 - std::pow(opts.beta2, static_cast<double>(t));
  const double shrink = 1.0 - lr * opts.weight_decay;
  double* w = param.value.data();
  double* m = param.adam_m.data();
  double* v = param.adam_v.data();
  const double* g = grad.data();
  for (std::size_t i = 0; i < param.value.size(); ++i) {
    if (opts.weight_decay != 0.0) w[i] *= shrink;
    m[i] = opts.beta1 * m[i] + (1.0 - opts.beta1) * g[i];
    v[i] = opts.beta2 * v[i] + (1.0 - opts.beta2) * g[i] * g[i];
    const double m_hat = m[i] / c1;
    const double v_hat = v[i] / c2;
    w[i] -= lr * m_hat / (std::sqrt(v_hat) + opts.eps);
  }
}

AdamW::AdamW(AdamWOptions opts) : opts_(opts) { opts_.validate(); }

void AdamW::step(ParameterStore& store, double lr) {
  if (!(lr >= 0.0) || !std::isfinite(lr)) throw ParameterError("learning rate must be finite and >= 0");
  ++t_;
  for (auto& p : store) adamw_step(p, p.accumulated_grad, lr, opts_, t_);
}

}  // namespace mil
