#include "mil/cli/bench_suite.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <sstream>

#include "mil/model/mil_model.hpp"
#include "mil/model/param_count.hpp"
#include "mil/numerics/memory.hpp"
#include "mil/pipeline/report.hpp"

namespace mil {
namespace {

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

double ms_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace

std::vector<BenchRow> run_bench(const BenchOptions& opts) {
  std::vector<BenchRow> rows;
  for (std::size_t d_kv : opts.d_kv) {
    Rng data_rng(derive_seed(opts.seed, "bench/data/" + std::to_string(d_kv)));
    Tensor patches({opts.n_patches, d_kv});
    for (auto& v : patches.values()) v = data_rng.normal();
    std::vector<TissueLabel> tissue(opts.n_patches);
    for (std::size_t i = 0; i < tissue.size(); ++i) tissue[i] = static_cast<TissueLabel>(data_rng.index(3));

    for (auto kind : opts.kinds) {
      AttentionConfig cfg;
      cfg.kind = kind;
      cfg.d_kv = d_kv;
      BenchRow row;
      row.method = display_name(kind);
      row.d_kv = d_kv;
      row.expected_parameters = expected_parameters(cfg).total;
      const MilModel model(cfg, derive_seed(opts.seed, "bench/init"));
      row.parameters = model.parameter_count();
      GradBuffer grads = model.parameters().zero_grads();

      std::vector<double> fwd, bwd;
      std::size_t peak = 0;
      for (std::size_t r = 0; r < std::max<std::size_t>(1, opts.repeats); ++r) {
        const std::size_t idle = memory::live_bytes();
        memory::reset_peak();
        Rng rng(derive_seed(opts.seed, "bench/dropout"));
        auto t0 = std::chrono::steady_clock::now();
        const auto trace = model.forward(patches, tissue, Mode::train, rng);
        fwd.push_back(ms_since(t0));
        t0 = std::chrono::steady_clock::now();
        model.backward(trace, 1.0, grads);
        bwd.push_back(ms_since(t0));
        peak = std::max(peak, memory::peak_bytes() - idle);
      }
      row.forward_ms = median(fwd);
      row.backward_ms = median(bwd);
      row.peak_bytes = peak;
      rows.push_back(row);
    }
  }
  return rows;
}

std::string format_bench(const std::vector<BenchRow>& rows) {
  std::ostringstream os;
  os << "method        d_kv   params      closed_form  match  fwd_ms     bwd_ms     peak_MiB\n";
  for (const auto& r : rows) {
    char line[200];
    std::snprintf(line, sizeof line, "%-13s %-6zu %-11zu %-12zu %-6s %-10.2f %-10.2f %.1f\n", r.method.c_str(), r.d_kv,
                  r.parameters, r.expected_parameters, r.parameters == r.expected_parameters ? "yes" : "NO",
                  r.forward_ms, r.backward_ms, static_cast<double>(r.peak_bytes) / (1024.0 * 1024.0));
    os << line;
  }
  return os.str();
}

}  // namespace mil
