#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>

#include "mil/numerics/ops.hpp"
#include "mil/numerics/parameter.hpp"

namespace mil {

// Initializers draw from a stream derived from (seed, parameter name).
Tensor xavier_uniform(std::size_t fan_in, std::size_t fan_out, std::uint64_t seed);
Tensor gaussian(Shape shape, double stddev, std::uint64_t seed);

// y = x W (+ b), W: [in, out]
class Linear {
 public:
  Linear(ParameterStore& store, const std::string& name, std::size_t in, std::size_t out, bool bias,
         std::uint64_t seed);

  Tensor forward(const ParameterStore& store, const Tensor& x) const;
  // Returns dx; accumulates dW, db into grads. x is the forward input.
  Tensor backward(const ParameterStore& store, const Tensor& x, const Tensor& dy, GradBuffer& grads) const;

  ParamId weight() const noexcept { return weight_; }
  std::optional<ParamId> bias() const noexcept { return bias_; }
  std::size_t in_features() const noexcept { return in_; }
  std::size_t out_features() const noexcept { return out_; }

 private:
  ParamId weight_;
  std::optional<ParamId> bias_;
  std::size_t in_;
  std::size_t out_;
};

class LayerNorm {
 public:
  LayerNorm(ParameterStore& store, const std::string& name, std::size_t dim);

  Tensor forward(const ParameterStore& store, const Tensor& x, LayerNormCache& cache) const;
  Tensor backward(const ParameterStore& store, const LayerNormCache& cache, const Tensor& dy,
                  GradBuffer& grads) const;

 private:
  ParamId gamma_;
  ParamId beta_;
};

// Linear -> GeLU -> Linear
class FeedForward {
 public:
  struct Cache {
    Tensor input;
    Tensor hidden_pre;
    Tensor hidden;
  };

  FeedForward(ParameterStore& store, const std::string& name, std::size_t dim, std::size_t hidden,
              std::uint64_t seed);

  Tensor forward(const ParameterStore& store, const Tensor& x, Cache& cache) const;
  Tensor backward(const ParameterStore& store, const Cache& cache, const Tensor& dy, GradBuffer& grads) const;

 private:
  Linear fc1_;
  Linear fc2_;
};

}  // namespace mil
