#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "mil/model/attention.hpp"
#include "mil/model/config.hpp"
#include "mil/model/layers.hpp"

// Pre-norm residual blocks: x + sublayer(norm(x)).
namespace mil {

// Self-attention among d_q query tokens, asymmetric cross-attention onto the
// patches, then an optional GeLU feed-forward at d_q.
class AsymDecoderBlock {
 public:
  struct Cache {
    LayerNormCache norm_self;
    Tensor normed_self;
    MultiHeadAttention::Cache self_attn;
    LayerNormCache norm_cross;
    AsymAttentionCache cross_attn;
    LayerNormCache norm_ffn;
    FeedForward::Cache ffn;
  };

  AsymDecoderBlock(ParameterStore& store, const std::string& name, const AttentionConfig& cfg, std::uint64_t seed);

  Tensor forward(const ParameterStore& store, const Tensor& q, const Tensor& patches, Cache& cache) const;
  // Returns dq; adds the patch gradient into dpatches.
  Tensor backward(const ParameterStore& store, const Cache& cache, const Tensor& dy, GradBuffer& grads,
                  Tensor& dpatches) const;

  const AsymmetricCrossAttention& cross() const noexcept { return cross_; }

 private:
  LayerNorm norm_self_;
  MultiHeadAttention self_attn_;
  LayerNorm norm_cross_;
  AsymmetricCrossAttention cross_;
  std::optional<LayerNorm> norm_ffn_;
  std::optional<FeedForward> ffn_;
};

// Conventional decoder block with every sublayer at d_kv.
class DecoderBlock {
 public:
  struct Cache {
    LayerNormCache norm_self;
    Tensor normed_self;
    MultiHeadAttention::Cache self_attn;
    LayerNormCache norm_cross;
    MultiHeadAttention::Cache cross_attn;
    LayerNormCache norm_ffn;
    FeedForward::Cache ffn;
  };

  DecoderBlock(ParameterStore& store, const std::string& name, const AttentionConfig& cfg, std::uint64_t seed);

  Tensor forward(const ParameterStore& store, const Tensor& q, const Tensor& patches, Cache& cache) const;
  Tensor backward(const ParameterStore& store, const Cache& cache, const Tensor& dy, GradBuffer& grads,
                  Tensor& dpatches) const;

 private:
  LayerNorm norm_self_;
  MultiHeadAttention self_attn_;
  LayerNorm norm_cross_;
  MultiHeadAttention cross_attn_;
  std::optional<LayerNorm> norm_ffn_;
  std::optional<FeedForward> ffn_;
};

// Self-attention over patch tokens plus feed-forward, at d_kv.
class EncoderBlock {
 public:
  struct Cache {
    LayerNormCache norm_attn;
    Tensor normed;
    MultiHeadAttention::Cache attn;
    LayerNormCache norm_ffn;
    FeedForward::Cache ffn;
  };

  EncoderBlock(ParameterStore& store, const std::string& name, const AttentionConfig& cfg, std::uint64_t seed);

  Tensor forward(const ParameterStore& store, const Tensor& x, Cache& cache) const;
  Tensor backward(const ParameterStore& store, const Cache& cache, const Tensor& dy, GradBuffer& grads) const;

 private:
  LayerNorm norm_attn_;
  MultiHeadAttention attn_;
  std::optional<LayerNorm> norm_ffn_;
  std::optional<FeedForward> ffn_;
};

}  // namespace mil
