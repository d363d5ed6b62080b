#pragma once

#include <cstddef>
#include <string>
#include <string_view>

#include <json.hpp>

namespace mil {

enum class AggregatorKind { asym_decoder, vanilla_decoder, encoder, abmil };

std::string_view to_string(AggregatorKind kind) noexcept;
// Accepts "asym", "asym_decoder", "transdec", "vanilla_decoder", "transenc",
// "encoder", "abmil".
AggregatorKind parse_aggregator(std::string_view name);

struct AttentionConfig {
  AggregatorKind kind = AggregatorKind::asym_decoder;
  std::size_t d_q = 64;     // query / model width of the asymmetric decoder
  std::size_t d_kv = 1536;  // patch-embedding width
  std::size_t n_heads = 2;
  std::size_t n_queries = 16;
  std::size_t n_layers = 1;
  double dropout_p = 0.5;
  bool feed_forward = true;
  std::size_t ffn_ratio = 4;
  std::size_t abmil_hidden = 128;
  bool tissue_encoding = true;

  // Throws ParameterError on the first violated invariant.
  void validate() const;
};

void to_json(nlohmann::json& j, const AttentionConfig& c);
void from_json(const nlohmann::json& j, AttentionConfig& c);

}  // namespace mil
