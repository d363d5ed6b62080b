#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "mil/model/config.hpp"

namespace mil {

struct BenchRow {
  std::string method;
  std::size_t d_kv = 0;
  std::size_t parameters = 0;           // counted from the built model
  std::size_t expected_parameters = 0;  // closed form
  double forward_ms = 0.0;              // per bag, median over repeats
  double backward_ms = 0.0;
  std::size_t peak_bytes = 0;  // tensor storage above the idle model during forward+backward
};

struct BenchOptions {
  std::vector<std::size_t> d_kv = {768, 1536};
  std::vector<AggregatorKind> kinds = {AggregatorKind::asym_decoder, AggregatorKind::vanilla_decoder,
                                       AggregatorKind::encoder};
  std::size_t n_patches = 512;
  std::size_t repeats = 3;
  std::uint64_t seed = 0;
};

// Defaults follow AttentionConfig (d_q 64, 2 heads, 16 queries, 1 layer).
std::vector<BenchRow> run_bench(const BenchOptions& opts);
std::string format_bench(const std::vector<BenchRow>& rows);

}  // namespace mil
