#include "mil/model/blocks.hpp"

namespace mil {

AsymDecoderBlock::AsymDecoderBlock(ParameterStore& store, const std::string& name, const AttentionConfig& cfg,
                                   std::uint64_t seed)
    : norm_self_(store, name + ".norm_self", cfg.d_q),
      self_attn_(store, name + ".self_attn", cfg.d_q, cfg.n_heads, seed),
      norm_cross_(store, name + ".norm_cross", cfg.d_q),
      cross_(store, name + ".cross_attn", cfg.d_q, cfg.d_kv, cfg.n_heads, seed) {
  if (cfg.feed_forward) {
    norm_ffn_.emplace(store, name + ".norm_ffn", cfg.d_q);
    ffn_.emplace(store, name + ".ffn", cfg.d_q, cfg.ffn_ratio * cfg.d_q, seed);
  }
}

Tensor AsymDecoderBlock::forward(const ParameterStore& store, const Tensor& q, const Tensor& patches,
                                 Cache& cache) const {
  cache.normed_self = norm_self_.forward(store, q, cache.norm_self);
  Tensor x = add(q, self_attn_.forward(store, cache.normed_self, cache.normed_self, cache.self_attn));
  const Tensor normed_cross = norm_cross_.forward(store, x, cache.norm_cross);
  add_into(x, cross_.forward(store, normed_cross, patches, cache.cross_attn));
  if (ffn_) {
    const Tensor normed_ffn = norm_ffn_->forward(store, x, cache.norm_ffn);
    add_into(x, ffn_->forward(store, normed_ffn, cache.ffn));
  }
  return x;
}

Tensor AsymDecoderBlock::backward(const ParameterStore& store, const Cache& cache, const Tensor& dy,
                                  GradBuffer& grads, Tensor& dpatches) const {
  Tensor dx = dy;
  if (ffn_) {
    const Tensor dn = ffn_->backward(store, cache.ffn, dy, grads);
    add_into(dx, norm_ffn_->backward(store, cache.norm_ffn, dn, grads));
  }
  Tensor dnc(cache.cross_attn.query.shape());
  cross_.backward(store, cache.cross_attn, dx, grads, dnc, dpatches);
  add_into(dx, norm_cross_.backward(store, cache.norm_cross, dnc, grads));
  Tensor dns(cache.normed_self.shape());
  self_attn_.backward(store, cache.self_attn, dx, grads, dns, dns);
  add_into(dx, norm_self_.backward(store, cache.norm_self, dns, grads));
  return dx;
}

DecoderBlock::DecoderBlock(ParameterStore& store, const std::string& name, const AttentionConfig& cfg,
                           std::uint64_t seed)
    : norm_self_(store, name + ".norm_self", cfg.d_kv),
      self_attn_(store, name + ".self_attn", cfg.d_kv, cfg.n_heads, seed),
      norm_cross_(store, name + ".norm_cross", cfg.d_kv),
      cross_attn_(store, name + ".cross_attn", cfg.d_kv, cfg.n_heads, seed) {
  if (cfg.feed_forward) {
    norm_ffn_.emplace(store, name + ".norm_ffn", cfg.d_kv);
    ffn_.emplace(store, name + ".ffn", cfg.d_kv, cfg.ffn_ratio * cfg.d_kv, seed);
  }
}

Tensor DecoderBlock::forward(const ParameterStore& store, const Tensor& q, const Tensor& patches,
                             Cache& cache) const {
  cache.normed_self = norm_self_.forward(store, q, cache.norm_self);
  Tensor x = add(q, self_attn_.forward(store, cache.normed_self, cache.normed_self, cache.self_attn));
  const Tensor normed_cross = norm_cross_.forward(store, x, cache.norm_cross);
  add_into(x, cross_attn_.forward(store, normed_cross, patches, cache.cross_attn));
  if (ffn_) {
    const Tensor normed_ffn = norm_ffn_->forward(store, x, cache.norm_ffn);
    add_into(x, ffn_->forward(store, normed_ffn, cache.ffn));
  }
  return x;
}

Tensor DecoderBlock::backward(const ParameterStore& store, const Cache& cache, const Tensor& dy, GradBuffer& grads,
                              Tensor& dpatches) const {
  Tensor dx = dy;
  if (ffn_) {
    const Tensor dn = ffn_->backward(store, cache.ffn, dy, grads);
    add_into(dx, norm_ffn_->backward(store, cache.norm_ffn, dn, grads));
  }
  Tensor dnc(cache.cross_attn.x_query.shape());
  cross_attn_.backward(store, cache.cross_attn, dx, grads, dnc, dpatches);
  add_into(dx, norm_cross_.backward(store, cache.norm_cross, dnc, grads));
  Tensor dns(cache.normed_self.shape());
  self_attn_.backward(store, cache.self_attn, dx, grads, dns, dns);
  add_into(dx, norm_self_.backward(store, cache.norm_self, dns, grads));
  return dx;
}

EncoderBlock::EncoderBlock(ParameterStore& store, const std::string& name, const AttentionConfig& cfg,
                           std::uint64_t seed)
    : norm_attn_(store, name + ".norm_attn", cfg.d_kv), attn_(store, name + ".attn", cfg.d_kv, cfg.n_heads, seed) {
  if (cfg.feed_forward) {
    norm_ffn_.emplace(store, name + ".norm_ffn", cfg.d_kv);
    ffn_.emplace(store, name + ".ffn", cfg.d_kv, cfg.ffn_ratio * cfg.d_kv, seed);
  }
}

Tensor EncoderBlock::forward(const ParameterStore& store, const Tensor& x_in, Cache& cache) const {
  cache.normed = norm_attn_.forward(store, x_in, cache.norm_attn);
  Tensor x = add(x_in, attn_.forward(store, cache.normed, cache.normed, cache.attn));
  if (ffn_) {
    const Tensor normed_ffn = norm_ffn_->forward(store, x, cache.norm_ffn);
    add_into(x, ffn_->forward(store, normed_ffn, cache.ffn));
  }
  return x;
}

Tensor EncoderBlock::backward(const ParameterStore& store, const Cache& cache, const Tensor& dy,
                              GradBuffer& grads) const {
  Tensor dx = dy;
  if (ffn_) {
    const Tensor dn = ffn_->backward(store, cache.ffn, dy, grads);
    add_into(dx, norm_ffn_->backward(store, cache.norm_ffn, dn, grads));
  }
  Tensor dn(cache.normed.shape());
  attn_.backward(store, cache.attn, dx, grads, dn, dn);
  add_into(dx, norm_attn_.backward(store, cache.norm_attn, dn, grads));
  return dx;
}

}  // namespace mil
