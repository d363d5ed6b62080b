#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "mil/model/layers.hpp"

namespace mil {

// Saved state of one softmax(Q K^T * scale) V evaluation.
struct AttentionCache {
  Tensor q;
  Tensor k;
  Tensor v;
  Tensor weights;  // [nq, nk], rows sum to 1
  double scale = 1.0;
};

// softmax(Q K^T * scale) V with Q:[nq,d], K:[nk,d], V:[nk,dv].
Tensor attention(const Tensor& q, const Tensor& k, const Tensor& v, double scale, AttentionCache* cache = nullptr);
// Accumulates into dq, dk, dv (each may be nullptr).
void attention_backward(const AttentionCache& cache, const Tensor& dout, Tensor* dq, Tensor* dk, Tensor* dv);

// Standard scaled dot-product attention, scale 1/sqrt(d).
Tensor scaled_dot_attention(const Tensor& q, const Tensor& k, const Tensor& v);

// Multi-head attention with Q/K/V/output projections at a single width.
// Heads partition the projected feature columns.
class MultiHeadAttention {
 public:
  struct Cache {
    Tensor x_query;
    Tensor x_context;
    Tensor concat;  // [nq, dim], per-head outputs side by side
    std::vector<AttentionCache> heads;
  };

  MultiHeadAttention(ParameterStore& store, const std::string& name, std::size_t dim, std::size_t n_heads,
                     std::uint64_t seed);

  // Self-attention when x_query and x_context are the same tensor.
  Tensor forward(const ParameterStore& store, const Tensor& x_query, const Tensor& x_context, Cache& cache) const;
  // Accumulates parameter gradients; adds input gradients into dx_query and dx_context.
  void backward(const ParameterStore& store, const Cache& cache, const Tensor& dy, GradBuffer& grads,
                Tensor& dx_query, Tensor& dx_context) const;

  std::size_t dim() const noexcept { return dim_; }
  std::size_t heads() const noexcept { return n_heads_; }

 private:
  Linear wq_;
  Linear wk_;
  Linear wv_;
  Linear wo_;
  std::size_t dim_;
  std::size_t n_heads_;
};

// Cross-attention from low-dimensional query tokens [nq, d_q] onto raw patch
// embeddings [np, d_kv], which serve as both keys and values:
//   softmax((q W_up) P^T / sqrt(d_kv)) P W_down
// W_up: [d_q, d_kv], W_down: [d_kv, d_q]. Each head attends over a d_kv/h
// column slice of the up-projected queries and of the patches; the scale
// stays 1/sqrt(d_kv).
struct AsymAttentionCache {
  Tensor query;
  Tensor patches;
  Tensor lifted;  // q W_up
  Tensor concat;  // per-head outputs at d_kv
  std::vector<AttentionCache> heads;
};

// Returns the pre-residual output [nq, d_q].
Tensor asymmetric_attention(const Tensor& q, const Tensor& patches, const Tensor& w_up, const Tensor& w_down,
                            std::size_t n_heads, AsymAttentionCache* cache = nullptr);
// Accumulates into dq, dpatches, dw_up, dw_down (each may be nullptr).
void asymmetric_attention_backward(const AsymAttentionCache& cache, const Tensor& w_up, const Tensor& w_down,
                                   const Tensor& dout, Tensor* dq, Tensor* dpatches, Tensor* dw_up,
                                   Tensor* dw_down);

// The asymmetric projection pair as parameters.
class AsymmetricCrossAttention {
 public:
  AsymmetricCrossAttention(ParameterStore& store, const std::string& name, std::size_t d_q, std::size_t d_kv,
                           std::size_t n_heads, std::uint64_t seed);

  Tensor forward(const ParameterStore& store, const Tensor& q, const Tensor& patches,
                 AsymAttentionCache& cache) const;
  void backward(const ParameterStore& store, const AsymAttentionCache& cache, const Tensor& dy, GradBuffer& grads,
                Tensor& dq, Tensor& dpatches) const;

  ParamId up() const noexcept { return up_; }
  ParamId down() const noexcept { return down_; }
  std::size_t heads() const noexcept { return n_heads_; }

 private:
  ParamId up_;
  ParamId down_;
  std::size_t d_q_;
  std::size_t d_kv_;
  std::size_t n_heads_;
};

// q + asymmetric_attention(q, patches, ...): the residual form.
Tensor asymmetric_cross_attention(const Tensor& q, const Tensor& patches, const ParameterStore& store,
                                  const AsymmetricCrossAttention& layer);

}  // namespace mil
