#include "mil/cli/gradcheck_suite.hpp"

#include <chrono>
#include <cstdio>
#include <sstream>

#include "mil/model/mil_model.hpp"
#include "mil/pipeline/loss.hpp"
#include "mil/pipeline/report.hpp"

namespace mil {

GradcheckCase gradcheck_model(const AttentionConfig& cfg, std::size_t n_patches, std::size_t max_coords,
                              std::uint64_t seed) {
  const auto t0 = std::chrono::steady_clock::now();
  MilModel model(cfg, derive_seed(seed, "gradcheck/init"));
  Rng data_rng(derive_seed(seed, "gradcheck/data"));
  Tensor patches({n_patches, cfg.d_kv});
  for (auto& v : patches.values()) v = data_rng.normal();
  std::vector<TissueLabel> tissue(n_patches);
  for (std::size_t i = 0; i < n_patches; ++i) tissue[i] = static_cast<TissueLabel>(i % kTissueClassCount);
  const std::uint64_t dropout_seed = derive_seed(seed, "gradcheck/dropout");
  // Tissue codes differ per patch, so nudging the table rows actually moves the loss.
  const std::span<const TissueLabel> labels = cfg.tissue_encoding ? std::span<const TissueLabel>(tissue)
                                                                  : std::span<const TissueLabel>();

  auto loss = [&] {
    Rng rng(dropout_seed);
    return bce_with_logits(model.forward(patches, labels, Mode::train, rng).logit, 1).loss;
  };
  Rng rng(dropout_seed);
  const auto trace = model.forward(patches, labels, Mode::train, rng);
  GradBuffer grads = model.parameters().zero_grads();
  model.backward(trace, bce_with_logits(trace.logit, 1).dlogit, grads);

  GradcheckCase c;
  c.method = display_name(cfg.kind);
  c.config = cfg;
  c.n_patches = n_patches;
  c.result = gradcheck(loss, model.parameters(), grads, {1e-5, max_coords, derive_seed(seed, "gradcheck/coords")});
  c.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return c;
}

std::vector<GradcheckCase> run_gradcheck_suite(const GradcheckSuiteOptions& opts) {
  const AggregatorKind kinds[] = {AggregatorKind::asym_decoder, AggregatorKind::vanilla_decoder,
                                  AggregatorKind::encoder, AggregatorKind::abmil};
  std::vector<GradcheckCase> cases;
  for (auto kind : kinds) {
    AttentionConfig cfg;
    cfg.kind = kind;
    cfg.d_q = 64;
    cfg.d_kv = 64;
    cfg.n_queries = 4;
    cfg.abmil_hidden = 32;
    cases.push_back(gradcheck_model(cfg, 4, 16, opts.seed));
  }
  if (opts.shape_scale) {
    for (auto kind : kinds) {
      AttentionConfig cfg;
      cfg.kind = kind;
      cfg.d_q = 64;
      cfg.d_kv = 1536;
      cfg.n_queries = 2;
      cases.push_back(gradcheck_model(cfg, 3, 3, opts.seed));
    }
  }
  return cases;
}

std::string format_gradcheck(const std::vector<GradcheckCase>& cases, double tolerance) {
  std::ostringstream os;
  os << "method        d_q   d_kv  patches  coords  max_rel_err  worst_tensor                 time_s  status\n";
  for (const auto& c : cases) {
    char line[256];
    std::snprintf(line, sizeof line, "%-13s %-5zu %-5zu %-8zu %-7zu %-12.3e %-28s %-7.2f %s\n", c.method.c_str(),
                  c.config.d_q, c.config.d_kv, c.n_patches, c.result.coords_checked, c.result.max_rel_error,
                  c.result.worst_tensor.c_str(), c.seconds, c.pass(tolerance) ? "PASS" : "FAIL");
    os << line;
  }
  return os.str();
}

}  // namespace mil
