#include "mil/model/config.hpp"

#include "mil/errors.hpp"

namespace mil {

std::string_view to_string(AggregatorKind kind) noexcept {
  switch (kind) {
    case AggregatorKind::asym_decoder: return "asym_decoder";
    case AggregatorKind::vanilla_decoder: return "vanilla_decoder";
    case AggregatorKind::encoder: return "encoder";
    case AggregatorKind::abmil: return "abmil";
  }
  return "?";
}

AggregatorKind parse_aggregator(std::string_view name) {
  if (name == "asym" || name == "asym_decoder" || name == "asymtransdec") return AggregatorKind::asym_decoder;
  if (name == "transdec" || name == "vanilla_decoder") return AggregatorKind::vanilla_decoder;
  if (name == "transenc" || name == "encoder") return AggregatorKind::encoder;
  if (name == "abmil") return AggregatorKind::abmil;
  throw ParameterError("unknown aggregator '" + std::string(name) + "'");
}

void AttentionConfig::validate() const {
  auto fail = [](const std::string& msg) { throw ParameterError("attention config: " + msg); };
  if (d_kv == 0) fail("d_kv must be >= 1");
  if (n_heads == 0) fail("n_heads must be >= 1");
  if (!(dropout_p >= 0.0 && dropout_p < 1.0)) fail("dropout_p must lie in [0, 1)");
  if (kind == AggregatorKind::abmil) {
    if (abmil_hidden == 0) fail("abmil_hidden must be >= 1");
    return;
  }
  if (n_layers == 0) fail("n_layers must be >= 1");
  if (d_kv % n_heads != 0) fail("d_kv (" + std::to_string(d_kv) + ") not divisible by n_heads");
  if (feed_forward && ffn_ratio == 0) fail("ffn_ratio must be >= 1");
  if (kind == AggregatorKind::asym_decoder || kind == AggregatorKind::vanilla_decoder) {
    if (n_queries == 0) fail("n_queries must be >= 1");
  }
  if (kind == AggregatorKind::asym_decoder) {
    if (d_q == 0) fail("d_q must be >= 1");
    if (d_q % n_heads != 0) fail("d_q (" + std::to_string(d_q) + ") not divisible by n_heads");
  }
}

void to_json(nlohmann::json& j, const AttentionConfig& c) {
  j = nlohmann::json{{"aggregator", std::string(to_string(c.kind))},
                     {"d_q", c.d_q},
                     {"d_kv", c.d_kv},
                     {"n_heads", c.n_heads},
                     {"n_queries", c.n_queries},
                     {"n_layers", c.n_layers},
                     {"dropout_p", c.dropout_p},
                     {"feed_forward", c.feed_forward},
                     {"ffn_ratio", c.ffn_ratio},
                     {"abmil_hidden", c.abmil_hidden},
                     {"tissue_encoding", c.tissue_encoding}};
}

void from_json(const nlohmann::json& j, AttentionConfig& c) {
  AttentionConfig d;
  c.kind = parse_aggregator(j.value("aggregator", std::string(to_string(d.kind))));
  c.d_q = j.value("d_q", d.d_q);
  c.d_kv = j.value("d_kv", d.d_kv);
  c.n_heads = j.value("n_heads", d.n_heads);
  c.n_queries = j.value("n_queries", d.n_queries);
  c.n_layers = j.value("n_layers", d.n_layers);
  c.dropout_p = j.value("dropout_p", d.dropout_p);
  c.feed_forward = j.value("feed_forward", d.feed_forward);
  c.ffn_ratio = j.value("ffn_ratio", d.ffn_ratio);
  c.abmil_hidden = j.value("abmil_hidden", d.abmil_hidden);
  c.tissue_encoding = j.value("tissue_encoding", d.tissue_encoding);
}

}  // namespace mil
