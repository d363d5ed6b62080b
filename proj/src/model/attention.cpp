#include "mil/model/attention.hpp"

#include <cmath>

#include "mil/errors.hpp"

namespace mil {

Tensor attention(const Tensor& q, const Tensor& k, const Tensor& v, double score_scale, AttentionCache* cache) {
  if (q.rank() != 2 || k.rank() != 2 || v.rank() != 2) throw DimensionError("attention: rank-2 inputs required");
  if (q.cols() != k.cols()) {
    throw DimensionError("attention: query " + shape_string(q.shape()) + " and key " + shape_string(k.shape()) +
                         " widths differ");
  }
  if (k.rows() != v.rows()) {
    throw DimensionError("attention: key " + shape_string(k.shape()) + " and value " + shape_string(v.shape()) +
                         " counts differ");
  }
  Tensor weights = softmax_rows(mil::scale(matmul_nt(q, k), score_scale));
  Tensor out = matmul(weights, v);
  if (cache) {
    cache->q = q;
    cache->k = k;
    cache->v = v;
    cache->weights = std::move(weights);
    cache->scale = score_scale;
  }
  return out;
}

void attention_backward(const AttentionCache& cache, const Tensor& dout, Tensor* dq, Tensor* dk, Tensor* dv) {
  Tensor dweights(cache.weights.shape());
  matmul_backward(cache.weights, cache.v, dout, &dweights, dv);
  Tensor dscores = softmax_rows_backward(cache.weights, dweights);
  for (auto& x : dscores.values()) x *= cache.scale;
  matmul_nt_backward(cache.q, cache.k, dscores, dq, dk);
}

Tensor scaled_dot_attention(const Tensor& q, const Tensor& k, const Tensor& v) {
  return attention(q, k, v, 1.0 / std::sqrt(static_cast<double>(q.cols())));
}

MultiHeadAttention::MultiHeadAttention(ParameterStore& store, const std::string& name, std::size_t dim,
                                       std::size_t n_heads, std::uint64_t seed)
    : wq_(store, name + ".q", dim, dim, true, seed),
      wk_(store, name + ".k", dim, dim, true, seed),
      wv_(store, name + ".v", dim, dim, true, seed),
      wo_(store, name + ".o", dim, dim, true, seed),
      dim_(dim),
      n_heads_(n_heads) {
  if (n_heads == 0 || dim % n_heads != 0) {
    throw ParameterError(name + ": width " + std::to_string(dim) + " not divisible by " + std::to_string(n_heads) +
                         " heads");
  }
}

Tensor MultiHeadAttention::forward(const ParameterStore& store, const Tensor& x_query, const Tensor& x_context,
                                   Cache& cache) const {
  expect_matrix(x_query, 0, dim_, "multi-head attention query");
  expect_matrix(x_context, 0, dim_, "multi-head attention context");
  const Tensor q = wq_.forward(store, x_query);
  const Tensor k = wk_.forward(store, x_context);
  const Tensor v = wv_.forward(store, x_context);
  const std::size_t hd = dim_ / n_heads_;
  const double sc = 1.0 / std::sqrt(static_cast<double>(hd));
  cache.x_query = x_query;
  cache.x_context = x_context;
  cache.concat = Tensor({x_query.rows(), dim_});
  cache.heads.assign(n_heads_, {});
  for (std::size_t h = 0; h < n_heads_; ++h) {
    Tensor out = attention(slice_cols(q, h * hd, hd), slice_cols(k, h * hd, hd), slice_cols(v, h * hd, hd), sc,
                           &cache.heads[h]);
    write_cols(cache.concat, out, h * hd);
  }
  return wo_.forward(store, cache.concat);
}

void MultiHeadAttention::backward(const ParameterStore& store, const Cache& cache, const Tensor& dy,
                                  GradBuffer& grads, Tensor& dx_query, Tensor& dx_context) const {
  const std::size_t hd = dim_ / n_heads_;
  const Tensor dconcat = wo_.backward(store, cache.concat, dy, grads);
  Tensor dq({cache.x_query.rows(), dim_});
  Tensor dk({cache.x_context.rows(), dim_});
  Tensor dv({cache.x_context.rows(), dim_});
  for (std::size_t h = 0; h < n_heads_; ++h) {
    const auto& hc = cache.heads[h];
    Tensor dqh(hc.q.shape());
    Tensor dkh(hc.k.shape());
    Tensor dvh(hc.v.shape());
    attention_backward(hc, slice_cols(dconcat, h * hd, hd), &dqh, &dkh, &dvh);
    add_cols_into(dq, dqh, h * hd);
    add_cols_into(dk, dkh, h * hd);
    add_cols_into(dv, dvh, h * hd);
  }
  add_into(dx_query, wq_.backward(store, cache.x_query, dq, grads));
  add_into(dx_context, wk_.backward(store, cache.x_context, dk, grads));
  add_into(dx_context, wv_.backward(store, cache.x_context, dv, grads));
}

Tensor asymmetric_attention(const Tensor& q, const Tensor& patches, const Tensor& w_up, const Tensor& w_down,
                            std::size_t n_heads, AsymAttentionCache* cache) {
  expect_matrix(q, 0, 0, "asymmetric attention query");
  expect_matrix(patches, 0, 0, "asymmetric attention patches");
  const std::size_t d_q = q.cols();
  const std::size_t d_kv = patches.cols();
  if (w_up.rank() != 2 || w_up.rows() != d_q || w_up.cols() != d_kv) {
    throw DimensionError("asymmetric attention: up-projection " + shape_string(w_up.shape()) +
                         " does not map query width " + std::to_string(d_q) + " to patch width " +
                         std::to_string(d_kv));
  }
  if (w_down.rank() != 2 || w_down.rows() != d_kv || w_down.cols() != d_q) {
    throw DimensionError("asymmetric attention: down-projection " + shape_string(w_down.shape()) +
                         " does not map patch width " + std::to_string(d_kv) + " to query width " +
                         std::to_string(d_q));
  }
  if (n_heads == 0 || d_kv % n_heads != 0) throw DimensionError("asymmetric attention: d_kv not divisible by heads");
  if (patches.rows() == 0) throw InputError("asymmetric attention: empty patch set");

  const std::size_t hd = d_kv / n_heads;
  const double sc = 1.0 / std::sqrt(static_cast<double>(d_kv));
  Tensor lifted = matmul(q, w_up);
  Tensor concat({q.rows(), d_kv});
  std::vector<AttentionCache> heads(n_heads);
  for (std::size_t h = 0; h < n_heads; ++h) {
    Tensor kv = n_heads == 1 ? patches : slice_cols(patches, h * hd, hd);
    Tensor out = attention(n_heads == 1 ? lifted : slice_cols(lifted, h * hd, hd), kv, kv, sc,
                           cache ? &heads[h] : nullptr);
    write_cols(concat, out, h * hd);
  }
  Tensor result = matmul(concat, w_down);
  if (cache) {
    cache->query = q;
    cache->patches = patches;
    cache->lifted = std::move(lifted);
    cache->concat = std::move(concat);
    cache->heads = std::move(heads);
  }
  return result;
}

void asymmetric_attention_backward(const AsymAttentionCache& cache, const Tensor& w_up, const Tensor& w_down,
                                   const Tensor& dout, Tensor* dq, Tensor* dpatches, Tensor* dw_up,
                                   Tensor* dw_down) {
  const std::size_t d_kv = cache.patches.cols();
  const std::size_t n_heads = cache.heads.size();
  const std::size_t hd = d_kv / n_heads;
  Tensor dconcat(cache.concat.shape());
  matmul_backward(cache.concat, w_down, dout, &dconcat, dw_down);
  Tensor dlifted(cache.lifted.shape());
  for (std::size_t h = 0; h < n_heads; ++h) {
    const auto& hc = cache.heads[h];
    Tensor dqh(hc.q.shape());
    Tensor dkh(hc.k.shape());
    Tensor dvh(hc.v.shape());
    attention_backward(hc, slice_cols(dconcat, h * hd, hd), &dqh, &dkh, &dvh);
    add_cols_into(dlifted, dqh, h * hd);
    if (dpatches) {
      add_cols_into(*dpatches, dkh, h * hd);
      add_cols_into(*dpatches, dvh, h * hd);
    }
  }
  matmul_backward(cache.query, w_up, dlifted, dq, dw_up);
}

AsymmetricCrossAttention::AsymmetricCrossAttention(ParameterStore& store, const std::string& name, std::size_t d_q,
                                                   std::size_t d_kv, std::size_t n_heads, std::uint64_t seed)
    : d_q_(d_q), d_kv_(d_kv), n_heads_(n_heads) {
  const std::string up_name = name + ".up";
  const std::string down_name = name + ".down";
  up_ = store.add(up_name, xavier_uniform(d_q, d_kv, derive_seed(seed, up_name)));
  down_ = store.add(down_name, xavier_uniform(d_kv, d_q, derive_seed(seed, down_name)));
}

Tensor AsymmetricCrossAttention::forward(const ParameterStore& store, const Tensor& q, const Tensor& patches,
                                         AsymAttentionCache& cache) const {
  if (patches.rank() != 2 || patches.cols() != d_kv_) {
    throw DimensionError("asymmetric cross-attention expects patches [np," + std::to_string(d_kv_) + "], got " +
                         shape_string(patches.shape()));
  }
  return asymmetric_attention(q, patches, store.value(up_), store.value(down_), n_heads_, &cache);
}

void AsymmetricCrossAttention::backward(const ParameterStore& store, const AsymAttentionCache& cache,
                                        const Tensor& dy, GradBuffer& grads, Tensor& dq, Tensor& dpatches) const {
  asymmetric_attention_backward(cache, store.value(up_), store.value(down_), dy, &dq, &dpatches, &grads[up_],
                                &grads[down_]);
}

Tensor asymmetric_cross_attention(const Tensor& q, const Tensor& patches, const ParameterStore& store,
                                  const AsymmetricCrossAttention& layer) {
  AsymAttentionCache cache;
  return add(q, layer.forward(store, q, patches, cache));
}

}  // namespace mil
