#include "mil/model/aggregators.hpp"

#include "mil/errors.hpp"

namespace mil {
namespace {

constexpr double kTokenInitStd = 0.02;

void require_bag(const Tensor& patches, std::size_t d_kv) {
  if (patches.rank() != 2 || patches.rows() == 0) {
    throw InputError("aggregator: bag must be a non-empty [np, d_kv] matrix, got " + shape_string(patches.shape()));
  }
  if (patches.cols() != d_kv) {
    throw DimensionError("aggregator: configured for d_kv=" + std::to_string(d_kv) + ", bag has " +
                         shape_string(patches.shape()));
  }
}

// ---------------------------------------------------------------------------

struct AsymTrace : AggregatorTrace {
  std::vector<AsymDecoderBlock::Cache> blocks;
  ClassifierHead::Cache head;
  std::size_t n_patches = 0;
};

class AsymDecoderAggregator final : public Aggregator {
 public:
  AsymDecoderAggregator(const AttentionConfig& cfg, ParameterStore& store, std::uint64_t seed)
      : cfg_(cfg),
        queries_(store.add("agg.queries",
                           gaussian({cfg.n_queries, cfg.d_q}, kTokenInitStd, derive_seed(seed, "agg.queries")))),
        head_(store, "agg.head", cfg.d_q, true, cfg.dropout_p, seed) {
    for (std::size_t l = 0; l < cfg.n_layers; ++l) {
      blocks_.emplace_back(store, "agg.block" + std::to_string(l), cfg, seed);
    }
  }

  AggregatorKind kind() const noexcept override { return AggregatorKind::asym_decoder; }

  std::unique_ptr<AggregatorTrace> forward(const ParameterStore& store, const Tensor& patches, Mode mode,
                                           Rng& rng) const override {
    require_bag(patches, cfg_.d_kv);
    auto trace = std::make_unique<AsymTrace>();
    trace->n_patches = patches.rows();
    trace->blocks.resize(blocks_.size());
    Tensor x = store.value(queries_);
    for (std::size_t l = 0; l < blocks_.size(); ++l) x = blocks_[l].forward(store, x, patches, trace->blocks[l]);
    trace->logit = head_.forward(store, x, mode, rng, trace->head);
    return trace;
  }

  Tensor backward(const ParameterStore& store, const AggregatorTrace& base, double dlogit,
                  GradBuffer& grads) const override {
    const auto& trace = static_cast<const AsymTrace&>(base);
    Tensor dpatches({trace.n_patches, cfg_.d_kv});
    Tensor dx = head_.backward(store, trace.head, dlogit, grads);
    for (std::size_t l = blocks_.size(); l-- > 0;) {
      dx = blocks_[l].backward(store, trace.blocks[l], dx, grads, dpatches);
    }
    add_into(grads[queries_], dx);
    return dpatches;
  }

  std::vector<AttentionMap> attention_maps(const AggregatorTrace& base) const override {
    const auto& trace = static_cast<const AsymTrace&>(base);
    std::vector<AttentionMap> maps;
    for (std::size_t l = 0; l < trace.blocks.size(); ++l) {
      const auto& heads = trace.blocks[l].cross_attn.heads;
      for (std::size_t h = 0; h < heads.size(); ++h) {
        maps.push_back({"block" + std::to_string(l) + ".cross.head" + std::to_string(h), heads[h].weights});
      }
    }
    return maps;
  }

 private:
  AttentionConfig cfg_;
  ParamId queries_;
  ClassifierHead head_;
  std::vector<AsymDecoderBlock> blocks_;
};

// ---------------------------------------------------------------------------

struct DecoderTrace : AggregatorTrace {
  std::vector<DecoderBlock::Cache> blocks;
  ClassifierHead::Cache head;
  std::size_t n_patches = 0;
};

class VanillaDecoderAggregator final : public Aggregator {
 public:
  VanillaDecoderAggregator(const AttentionConfig& cfg, ParameterStore& store, std::uint64_t seed)
      : cfg_(cfg),
        queries_(store.add("agg.queries",
                           gaussian({cfg.n_queries, cfg.d_kv}, kTokenInitStd, derive_seed(seed, "agg.queries")))),
        head_(store, "agg.head", cfg.d_kv, true, cfg.dropout_p, seed) {
    for (std::size_t l = 0; l < cfg.n_layers; ++l) {
      blocks_.emplace_back(store, "agg.block" + std::to_string(l), cfg, seed);
    }
  }

  AggregatorKind kind() const noexcept override { return AggregatorKind::vanilla_decoder; }

  std::unique_ptr<AggregatorTrace> forward(const ParameterStore& store, const Tensor& patches, Mode mode,
                                           Rng& rng) const override {
    require_bag(patches, cfg_.d_kv);
    auto trace = std::make_unique<DecoderTrace>();
    trace->n_patches = patches.rows();
    trace->blocks.resize(blocks_.size());
    Tensor x = store.value(queries_);
    for (std::size_t l = 0; l < blocks_.size(); ++l) x = blocks_[l].forward(store, x, patches, trace->blocks[l]);
    trace->logit = head_.forward(store, x, mode, rng, trace->head);
    return trace;
  }

  Tensor backward(const ParameterStore& store, const AggregatorTrace& base, double dlogit,
                  GradBuffer& grads) const override {
    const auto& trace = static_cast<const DecoderTrace&>(base);
    Tensor dpatches({trace.n_patches, cfg_.d_kv});
    Tensor dx = head_.backward(store, trace.head, dlogit, grads);
    for (std::size_t l = blocks_.size(); l-- > 0;) {
      dx = blocks_[l].backward(store, trace.blocks[l], dx, grads, dpatches);
    }
    add_into(grads[queries_], dx);
    return dpatches;
  }

  std::vector<AttentionMap> attention_maps(const AggregatorTrace& base) const override {
    const auto& trace = static_cast<const DecoderTrace&>(base);
    std::vector<AttentionMap> maps;
    for (std::size_t l = 0; l < trace.blocks.size(); ++l) {
      const auto& heads = trace.blocks[l].cross_attn.heads;
      for (std::size_t h = 0; h < heads.size(); ++h) {
        maps.push_back({"block" + std::to_string(l) + ".cross.head" + std::to_string(h), heads[h].weights});
      }
    }
    return maps;
  }

 private:
  AttentionConfig cfg_;
  ParamId queries_;
  ClassifierHead head_;
  std::vector<DecoderBlock> blocks_;
};

// ---------------------------------------------------------------------------

struct EncoderTrace : AggregatorTrace {
  std::vector<EncoderBlock::Cache> blocks;
  ClassifierHead::Cache head;
};

class EncoderAggregator final : public Aggregator {
 public:
  EncoderAggregator(const AttentionConfig& cfg, ParameterStore& store, std::uint64_t seed)
      : cfg_(cfg), head_(store, "agg.head", cfg.d_kv, true, cfg.dropout_p, seed) {
    for (std::size_t l = 0; l < cfg.n_layers; ++l) {
      blocks_.emplace_back(store, "agg.block" + std::to_string(l), cfg, seed);
    }
  }

  AggregatorKind kind() const noexcept override { return AggregatorKind::encoder; }

  std::unique_ptr<AggregatorTrace> forward(const ParameterStore& store, const Tensor& patches, Mode mode,
                                           Rng& rng) const override {
    require_bag(patches, cfg_.d_kv);
    auto trace = std::make_unique<EncoderTrace>();
    trace->blocks.resize(blocks_.size());
    Tensor x = patches;
    for (std::size_t l = 0; l < blocks_.size(); ++l) x = blocks_[l].forward(store, x, trace->blocks[l]);
    trace->logit = head_.forward(store, x, mode, rng, trace->head);
    return trace;
  }

  Tensor backward(const ParameterStore& store, const AggregatorTrace& base, double dlogit,
                  GradBuffer& grads) const override {
    const auto& trace = static_cast<const EncoderTrace&>(base);
    Tensor dx = head_.backward(store, trace.head, dlogit, grads);
    for (std::size_t l = blocks_.size(); l-- > 0;) dx = blocks_[l].backward(store, trace.blocks[l], dx, grads);
    return dx;
  }

  std::vector<AttentionMap> attention_maps(const AggregatorTrace& base) const override {
    const auto& trace = static_cast<const EncoderTrace&>(base);
    std::vector<AttentionMap> maps;
    for (std::size_t l = 0; l < trace.blocks.size(); ++l) {
      const auto& heads = trace.blocks[l].attn.heads;
      for (std::size_t h = 0; h < heads.size(); ++h) {
        maps.push_back({"block" + std::to_string(l) + ".self.head" + std::to_string(h), heads[h].weights});
      }
    }
    return maps;
  }

 private:
  AttentionConfig cfg_;
  ClassifierHead head_;
  std::vector<EncoderBlock> blocks_;
};

// ---------------------------------------------------------------------------

// Gated attention pooling: a = softmax_i(w^T (tanh(V h_i) * sigmoid(U h_i))).
struct AbmilTrace : AggregatorTrace {
  Tensor patches;
  Tensor hidden_tanh;
  Tensor hidden_gate;
  Tensor gated;
  Tensor weights;  // [1, np]
  ClassifierHead::Cache head;
};

class AbmilAggregator final : public Aggregator {
 public:
  AbmilAggregator(const AttentionConfig& cfg, ParameterStore& store, std::uint64_t seed)
      : cfg_(cfg),
        attn_v_(store, "agg.attn_v", cfg.d_kv, cfg.abmil_hidden, true, seed),
        attn_u_(store, "agg.attn_u", cfg.d_kv, cfg.abmil_hidden, true, seed),
        attn_w_(store, "agg.attn_w", cfg.abmil_hidden, 1, false, seed),
        head_(store, "agg.head", cfg.d_kv, false, cfg.dropout_p, seed) {}

  AggregatorKind kind() const noexcept override { return AggregatorKind::abmil; }

  std::unique_ptr<AggregatorTrace> forward(const ParameterStore& store, const Tensor& patches, Mode mode,
                                           Rng& rng) const override {
    require_bag(patches, cfg_.d_kv);
    auto trace = std::make_unique<AbmilTrace>();
    trace->patches = patches;
    trace->hidden_tanh = tanh(attn_v_.forward(store, patches));
    trace->hidden_gate = sigmoid(attn_u_.forward(store, patches));
    trace->gated = hadamard(trace->hidden_tanh, trace->hidden_gate);
    const Tensor scores = attn_w_.forward(store, trace->gated);  // [np, 1]
    trace->weights = softmax_rows(scores.reshaped({1, patches.rows()}));
    const Tensor pooled = matmul(trace->weights, patches);
    trace->logit = head_.forward(store, pooled, mode, rng, trace->head);
    return trace;
  }

  Tensor backward(const ParameterStore& store, const AggregatorTrace& base, double dlogit,
                  GradBuffer& grads) const override {
    const auto& trace = static_cast<const AbmilTrace&>(base);
    const std::size_t np = trace.patches.rows();
    const Tensor dpooled = head_.backward(store, trace.head, dlogit, grads);
    Tensor dweights(trace.weights.shape());
    Tensor dpatches(trace.patches.shape());
    matmul_backward(trace.weights, trace.patches, dpooled, &dweights, &dpatches);
    const Tensor dscores = softmax_rows_backward(trace.weights, dweights).reshaped({np, 1});
    const Tensor dgated = attn_w_.backward(store, trace.gated, dscores, grads);
    const Tensor dtanh = hadamard(dgated, trace.hidden_gate);
    const Tensor dgate = hadamard(dgated, trace.hidden_tanh);
    add_into(dpatches, attn_v_.backward(store, trace.patches, tanh_backward(trace.hidden_tanh, dtanh), grads));
    add_into(dpatches, attn_u_.backward(store, trace.patches, sigmoid_backward(trace.hidden_gate, dgate), grads));
    return dpatches;
  }

  std::vector<AttentionMap> attention_maps(const AggregatorTrace& base) const override {
    const auto& trace = static_cast<const AbmilTrace&>(base);
    return {{"gated_attention", trace.weights}};
  }

 private:
  AttentionConfig cfg_;
  Linear attn_v_;
  Linear attn_u_;
  Linear attn_w_;
  ClassifierHead head_;
};

}  // namespace

ClassifierHead::ClassifierHead(ParameterStore& store, const std::string& name, std::size_t dim, bool final_norm,
                               double dropout_p, std::uint64_t seed)
    : norm_(final_norm ? std::optional<LayerNorm>(std::in_place, store, name + ".norm", dim) : std::nullopt),
      classifier_(store, name + ".classifier", dim, 1, true, seed),
      dropout_p_(dropout_p) {}

double ClassifierHead::forward(const ParameterStore& store, const Tensor& tokens, Mode mode, Rng& rng,
                               Cache& cache) const {
  cache.rows = tokens.rows();
  const Tensor pooled = mean_rows(norm_ ? norm_->forward(store, tokens, cache.norm) : tokens);
  cache.dropped = dropout(pooled, dropout_p_, mode, rng, &cache.mask);
  return classifier_.forward(store, cache.dropped)[0];
}

Tensor ClassifierHead::backward(const ParameterStore& store, const Cache& cache, double dlogit,
                                GradBuffer& grads) const {
  const Tensor dy({1, 1}, dlogit);
  const Tensor ddropped = classifier_.backward(store, cache.dropped, dy, grads);
  const Tensor dtokens = mean_rows_backward(dropout_backward(cache.mask, ddropped), cache.rows);
  return norm_ ? norm_->backward(store, cache.norm, dtokens, grads) : dtokens;
}

std::unique_ptr<Aggregator> make_aggregator(const AttentionConfig& cfg, ParameterStore& store, std::uint64_t seed) {
  cfg.validate();
  switch (cfg.kind) {
    case AggregatorKind::asym_decoder: return std::make_unique<AsymDecoderAggregator>(cfg, store, seed);
    case AggregatorKind::vanilla_decoder: return std::make_unique<VanillaDecoderAggregator>(cfg, store, seed);
    case AggregatorKind::encoder: return std::make_unique<EncoderAggregator>(cfg, store, seed);
    case AggregatorKind::abmil: return std::make_unique<AbmilAggregator>(cfg, store, seed);
  }
  throw ParameterError("unknown aggregator kind");
}

}  // namespace mil
