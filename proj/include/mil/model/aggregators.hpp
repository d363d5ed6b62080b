#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "mil/model/blocks.hpp"
#include "mil/model/config.hpp"

namespace mil {

// Saved state of one aggregator forward pass.
struct AggregatorTrace {
  virtual ~AggregatorTrace() = default;
  double logit = 0.0;
};

struct AttentionMap {
  std::string name;
  Tensor weights;  // [queries, patches]
};

// pooled = mean_rows(norm(tokens)); logit = classifier(dropout(pooled))
class ClassifierHead {
 public:
  struct Cache {
    LayerNormCache norm;
    std::size_t rows = 0;
    DropoutMask mask;
    Tensor dropped;
  };

  ClassifierHead(ParameterStore& store, const std::string& name, std::size_t dim, bool final_norm, double dropout_p,
                 std::uint64_t seed);

  double forward(const ParameterStore& store, const Tensor& tokens, Mode mode, Rng& rng, Cache& cache) const;
  Tensor backward(const ParameterStore& store, const Cache& cache, double dlogit, GradBuffer& grads) const;

 private:
  std::optional<LayerNorm> norm_;
  Linear classifier_;
  double dropout_p_;
};

// Maps one bag of (already tissue-encoded) patch embeddings [np, d_kv] to a
// scalar logit. Parameters live in an external store; the aggregator holds
// only ids and is immutable after construction.
class Aggregator {
 public:
  virtual ~Aggregator() = default;
  virtual AggregatorKind kind() const noexcept = 0;
  virtual std::unique_ptr<AggregatorTrace> forward(const ParameterStore& store, const Tensor& patches, Mode mode,
                                                   Rng& rng) const = 0;
  // Accumulates parameter gradients and returns d logit / d patches.
  virtual Tensor backward(const ParameterStore& store, const AggregatorTrace& trace, double dlogit,
                          GradBuffer& grads) const = 0;
  virtual std::vector<AttentionMap> attention_maps(const AggregatorTrace& trace) const = 0;
};

// Registers the aggregator's parameters in `store` (names prefixed "agg.").
std::unique_ptr<Aggregator> make_aggregator(const AttentionConfig& cfg, ParameterStore& store, std::uint64_t seed);

}  // namespace mil
