#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "mil/numerics/tensor.hpp"

namespace mil {

// One learnable tensor with its accumulated gradient and AdamW moments.
// All four tensors share one shape; the moments start at zero.
struct Parameter {
  std::string name;
  Tensor value;
  Tensor accumulated_grad;
  Tensor adam_m;
  Tensor adam_v;

  Parameter(std::string name, Tensor init);
};

// Per-bag gradient scratch, index-aligned with a ParameterStore.
using GradBuffer = std::vector<Tensor>;

using ParamId = std::size_t;

// Ordered collection of named parameters. Layers hold ParamIds into it; the
// order of registration is the serialization and optimizer order.
class ParameterStore {
 public:
  ParamId add(std::string name, Tensor init);

  std::size_t size() const noexcept { return params_.size(); }
  const Tensor& value(ParamId id) const { return params_[id].value; }
  Tensor& value(ParamId id) { return params_[id].value; }
  Parameter& operator[](ParamId id) { return params_[id]; }
  const Parameter& operator[](ParamId id) const { return params_[id]; }
  auto begin() noexcept { return params_.begin(); }
  auto end() noexcept { return params_.end(); }
  auto begin() const noexcept { return params_.begin(); }
  auto end() const noexcept { return params_.end(); }

  // Throws std::out_of_range for unknown names.
  ParamId find(std::string_view name) const;

  std::size_t scalar_count() const noexcept;
  GradBuffer zero_grads() const;
  void zero_accumulated();
  // accumulated_grad += scale * grads
  void accumulate(const GradBuffer& grads, double scale = 1.0);

 private:
  std::vector<Parameter> params_;
};

}  // namespace mil
