#include "mil/model/layers.hpp"

#include <cmath>

#include "mil/numerics/rng.hpp"

namespace mil {

Tensor xavier_uniform(std::size_t fan_in, std::size_t fan_out, std::uint64_t seed) {
  Rng rng(seed);
  const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  Tensor w({fan_in, fan_out});
  for (auto& v : w.values()) v = (2.0 * rng.uniform() - 1.0) * limit;
  return w;
}

Tensor gaussian(Shape shape, double stddev, std::uint64_t seed) {
  Rng rng(seed);
  Tensor t(std::move(shape));
  for (auto& v : t.values()) v = rng.normal(0.0, stddev);
  return t;
}

Linear::Linear(ParameterStore& store, const std::string& name, std::size_t in, std::size_t out, bool bias,
               std::uint64_t seed)
    : in_(in), out_(out) {
  const std::string wname = name + ".weight";
  weight_ = store.add(wname, xavier_uniform(in, out, derive_seed(seed, wname)));
  if (bias) bias_ = store.add(name + ".bias", Tensor({out}));
}

Tensor Linear::forward(const ParameterStore& store, const Tensor& x) const {
  Tensor y = matmul(x, store.value(weight_));
  if (bias_) y = add_row(y, store.value(*bias_));
  return y;
}

Tensor Linear::backward(const ParameterStore& store, const Tensor& x, const Tensor& dy, GradBuffer& grads) const {
  Tensor dx(x.shape());
  matmul_backward(x, store.value(weight_), dy, &dx, &grads[weight_]);
  if (bias_) column_sum_into(dy, grads[*bias_]);
  return dx;
}

LayerNorm::LayerNorm(ParameterStore& store, const std::string& name, std::size_t dim) {
  gamma_ = store.add(name + ".gamma", Tensor({dim}, 1.0));
  beta_ = store.add(name + ".beta", Tensor({dim}));
}

Tensor LayerNorm::forward(const ParameterStore& store, const Tensor& x, LayerNormCache& cache) const {
  return layer_norm(x, store.value(gamma_), store.value(beta_), kLayerNormEps, &cache);
}

Tensor LayerNorm::backward(const ParameterStore& store, const LayerNormCache& cache, const Tensor& dy,
                           GradBuffer& grads) const {
  return layer_norm_backward(cache, store.value(gamma_), dy, &grads[gamma_], &grads[beta_]);
}

FeedForward::FeedForward(ParameterStore& store, const std::string& name, std::size_t dim, std::size_t hidden,
                         std::uint64_t seed)
    : fc1_(store, name + ".fc1", dim, hidden, true, seed), fc2_(store, name + ".fc2", hidden, dim, true, seed) {}

Tensor FeedForward::forward(const ParameterStore& store, const Tensor& x, Cache& cache) const {
  cache.input = x;
  cache.hidden_pre = fc1_.forward(store, x);
  cache.hidden = gelu(cache.hidden_pre);
  return fc2_.forward(store, cache.hidden);
}

Tensor FeedForward::backward(const ParameterStore& store, const Cache& cache, const Tensor& dy,
                             GradBuffer& grads) const {
  Tensor dh = fc2_.backward(store, cache.hidden, dy, grads);
  Tensor dpre = gelu_backward(cache.hidden_pre, dh);
  return fc1_.backward(store, cache.input, dpre, grads);
}

}  // namespace mil
