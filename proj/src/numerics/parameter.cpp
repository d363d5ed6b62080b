#include "mil/numerics/parameter.hpp"

#include <stdexcept>

#include "mil/errors.hpp"
#include "mil/numerics/ops.hpp"

namespace mil {

Parameter::Parameter(std::string n, Tensor init)
    : name(std::move(n)),
      value(std::move(init)),
      accumulated_grad(value.shape()),
      adam_m(value.shape()),
      adam_v(value.shape()) {}

ParamId ParameterStore::add(std::string name, Tensor init) {
  for (const auto& p : params_) {
    if (p.name == name) throw ParameterError("duplicate parameter name: " + name);
  }
  params_.emplace_back(std::move(name), std::move(init));
  return params_.size() - 1;
}

ParamId ParameterStore::find(std::string_view name) const {
  for (std::size_t i = 0; i < params_.size(); ++i) {
    if (params_[i].name == name) return i;
  }
  throw std::out_of_range("no parameter named " + std::string(name));
}

std::size_t ParameterStore::scalar_count() const noexcept {
  std::size_t n = 0;
  for (const auto& p : params_) n += p.value.size();
  return n;
}

GradBuffer ParameterStore::zero_grads() const {
  GradBuffer g;
  g.reserve(params_.size());
  for (const auto& p : params_) g.emplace_back(p.value.shape());
  return g;
}

void ParameterStore::zero_accumulated() {
  for (auto& p : params_) p.accumulated_grad.fill(0.0);
}

void ParameterStore::accumulate(const GradBuffer& grads, double scale) {
  if (grads.size() != params_.size()) {
    throw StateError("gradient buffer has " + std::to_string(grads.size()) + " entries for " +
                     std::to_string(params_.size()) + " parameters");
  }
  for (std::size_t i = 0; i < params_.size(); ++i) add_scaled_into(params_[i].accumulated_grad, grads[i], scale);
}

}  // namespace mil
