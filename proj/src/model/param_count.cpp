#include "mil/model/param_count.hpp"

#include "mil/tissue_label.hpp"

namespace mil {
namespace {

std::size_t linear(std::size_t in, std::size_t out, bool bias) { return in * out + (bias ? out : 0); }
std::size_t norm(std::size_t d) { return 2 * d; }
// Q, K, V, O projections with biases
std::size_t mha(std::size_t d) { return 4 * (d * d + d); }
std::size_t ffn(std::size_t d, std::size_t ratio) { return linear(d, ratio * d, true) + linear(ratio * d, d, true); }

}  // namespace

ParameterBreakdown expected_parameters(const AttentionConfig& cfg) {
  ParameterBreakdown b;
  const std::size_t dq = cfg.d_q;
  const std::size_t dkv = cfg.d_kv;
  if (cfg.tissue_encoding) b.tissue = kTissueClassCount * dkv;

  const std::size_t ffn_q = cfg.feed_forward ? norm(dq) + ffn(dq, cfg.ffn_ratio) : 0;
  const std::size_t ffn_kv = cfg.feed_forward ? norm(dkv) + ffn(dkv, cfg.ffn_ratio) : 0;

  switch (cfg.kind) {
    case AggregatorKind::asym_decoder:
      b.queries = cfg.n_queries * dq;
      // self-attention at d_q, then W_up [d_q,d_kv] and W_down [d_kv,d_q] without bias
      b.per_layer = norm(dq) + mha(dq) + norm(dq) + 2 * dq * dkv + ffn_q;
      b.head = norm(dq) + linear(dq, 1, true);
      break;
    case AggregatorKind::vanilla_decoder:
      b.queries = cfg.n_queries * dkv;
      b.per_layer = norm(dkv) + mha(dkv) + norm(dkv) + mha(dkv) + ffn_kv;
      b.head = norm(dkv) + linear(dkv, 1, true);
      break;
    case AggregatorKind::encoder:
      b.per_layer = norm(dkv) + mha(dkv) + ffn_kv;
      b.head = norm(dkv) + linear(dkv, 1, true);
      break;
    case AggregatorKind::abmil:
      b.pooling = 2 * linear(dkv, cfg.abmil_hidden, true) + linear(cfg.abmil_hidden, 1, false);
      b.head = linear(dkv, 1, true);
      break;
  }
  if (cfg.kind != AggregatorKind::abmil) b.layers = b.per_layer * cfg.n_layers;
  b.total = b.tissue + b.queries + b.layers + b.pooling + b.head;
  return b;
}

}  // namespace mil
