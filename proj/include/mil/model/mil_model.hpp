#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "mil/model/aggregators.hpp"
#include "mil/model/config.hpp"
#include "mil/tissue_label.hpp"

namespace mil {

// out[i] = embeddings[i] + table[labels[i]]. Throws InputError on a label
// count mismatch or an out-of-range code.
Tensor apply_tissue_encoding(const Tensor& embeddings, std::span<const TissueLabel> labels, const Tensor& table);
// dtable[labels[i]] += dout[i]
void apply_tissue_encoding_backward(const Tensor& dout, std::span<const TissueLabel> labels, Tensor& dtable);

// Tissue-encoding table plus one aggregator over a shared parameter store.
class MilModel {
 public:
  struct Trace {
    std::unique_ptr<AggregatorTrace> aggregator;
    std::vector<TissueLabel> labels;
    double logit = 0.0;
  };

  MilModel(const AttentionConfig& cfg, std::uint64_t init_seed);
  MilModel(const MilModel& other);
  MilModel& operator=(const MilModel& other);
  MilModel(MilModel&&) noexcept = default;
  MilModel& operator=(MilModel&&) noexcept = default;

  const AttentionConfig& config() const noexcept { return cfg_; }
  std::uint64_t init_seed() const noexcept { return init_seed_; }
  ParameterStore& parameters() noexcept { return store_; }
  const ParameterStore& parameters() const noexcept { return store_; }
  std::optional<ParamId> tissue_table() const noexcept { return tissue_table_; }
  std::size_t parameter_count() const noexcept { return store_.scalar_count(); }

  // `tissue` may be empty when the model has no tissue encoding.
  Trace forward(const Tensor& embeddings, std::span<const TissueLabel> tissue, Mode mode, Rng& rng) const;
  // Accumulates d logit / d params (scaled by dlogit) into grads.
  void backward(const Trace& trace, double dlogit, GradBuffer& grads) const;

  double predict(const Tensor& embeddings, std::span<const TissueLabel> tissue) const;
  std::vector<AttentionMap> attention_maps(const Tensor& embeddings, std::span<const TissueLabel> tissue) const;

  // Copies parameter values (not optimizer state) from a model of identical layout.
  void load_values(const ParameterStore& values);

 private:
  Tensor encode(const Tensor& embeddings, std::span<const TissueLabel> tissue) const;

  AttentionConfig cfg_;
  std::uint64_t init_seed_;
  ParameterStore store_;
  std::optional<ParamId> tissue_table_;
  std::unique_ptr<Aggregator> aggregator_;
};

}  // namespace mil
