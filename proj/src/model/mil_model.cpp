#include "mil/model/mil_model.hpp"

#include "mil/errors.hpp"
#include "mil/model/layers.hpp"

namespace mil {

namespace {
constexpr double kTissueInitStd = 0.02;
}

Tensor apply_tissue_encoding(const Tensor& embeddings, std::span<const TissueLabel> labels, const Tensor& table) {
  if (labels.size() != embeddings.rows()) {
    throw InputError("tissue encoding: " + std::to_string(labels.size()) + " labels for " +
                     std::to_string(embeddings.rows()) + " patches");
  }
  if (table.rank() != 2 || table.rows() != kTissueClassCount || table.cols() != embeddings.cols()) {
    throw DimensionError("tissue encoding: table " + shape_string(table.shape()) + " does not match embeddings " +
                         shape_string(embeddings.shape()));
  }
  Tensor out = embeddings;
  const std::size_t d = embeddings.cols();
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const auto code = static_cast<std::uint8_t>(labels[i]);
    if (!is_valid_tissue_code(code)) {
      throw InputError("tissue encoding: unknown tissue code " + std::to_string(code) + " at patch " +
                       std::to_string(i));
    }
    const double* t = table.data() + code * d;
    double* r = out.data() + i * d;
    for (std::size_t j = 0; j < d; ++j) r[j] += t[j];
  }
  return out;
}

void apply_tissue_encoding_backward(const Tensor& dout, std::span<const TissueLabel> labels, Tensor& dtable) {
  const std::size_t d = dout.cols();
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const auto code = static_cast<std::size_t>(labels[i]);
    const double* g = dout.data() + i * d;
    double* t = dtable.data() + code * d;
    for (std::size_t j = 0; j < d; ++j) t[j] += g[j];
  }
}

MilModel::MilModel(const AttentionConfig& cfg, std::uint64_t init_seed) : cfg_(cfg), init_seed_(init_seed) {
  cfg_.validate();
  if (cfg_.tissue_encoding) {
    tissue_table_ = store_.add("tissue.encoding", gaussian({kTissueClassCount, cfg_.d_kv}, kTissueInitStd,
                                                           derive_seed(init_seed, "tissue.encoding")));
  }
  aggregator_ = make_aggregator(cfg_, store_, init_seed);
}

MilModel::MilModel(const MilModel& other) : MilModel(other.cfg_, other.init_seed_) { store_ = other.store_; }

MilModel& MilModel::operator=(const MilModel& other) {
  if (this != &other) {
    MilModel copy(other);
    *this = std::move(copy);
  }
  return *this;
}

Tensor MilModel::encode(const Tensor& embeddings, std::span<const TissueLabel> tissue) const {
  if (embeddings.rank() != 2 || embeddings.rows() == 0) {
    throw InputError("model: bag must be a non-empty [np, d_kv] matrix, got " + shape_string(embeddings.shape()));
  }
  if (!tissue_table_) return embeddings;
  return apply_tissue_encoding(embeddings, tissue, store_.value(*tissue_table_));
}

MilModel::Trace MilModel::forward(const Tensor& embeddings, std::span<const TissueLabel> tissue, Mode mode,
                                  Rng& rng) const {
  Trace trace;
  trace.aggregator = aggregator_->forward(store_, encode(embeddings, tissue), mode, rng);
  if (tissue_table_) trace.labels.assign(tissue.begin(), tissue.end());
  trace.logit = trace.aggregator->logit;
  return trace;
}

void MilModel::backward(const Trace& trace, double dlogit, GradBuffer& grads) const {
  const Tensor dpatches = aggregator_->backward(store_, *trace.aggregator, dlogit, grads);
  if (tissue_table_) apply_tissue_encoding_backward(dpatches, trace.labels, grads[*tissue_table_]);
}

double MilModel::predict(const Tensor& embeddings, std::span<const TissueLabel> tissue) const {
  Rng unused(0);
  return aggregator_->forward(store_, encode(embeddings, tissue), Mode::eval, unused)->logit;
}

std::vector<AttentionMap> MilModel::attention_maps(const Tensor& embeddings,
                                                   std::span<const TissueLabel> tissue) const {
  Rng unused(0);
  const auto trace = aggregator_->forward(store_, encode(embeddings, tissue), Mode::eval, unused);
  return aggregator_->attention_maps(*trace);
}

void MilModel::load_values(const ParameterStore& values) {
  if (values.size() != store_.size()) throw StateError("load_values: parameter count differs");
  for (std::size_t i = 0; i < store_.size(); ++i) {
    if (values[i].name != store_[i].name || !values[i].value.same_shape(store_[i].value)) {
      throw StateError("load_values: parameter " + store_[i].name + " does not match " + values[i].name);
    }
    store_[i].value = values[i].value;
  }
}

}  // namespace mil
