#include "mil/pipeline/auroc.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "mil/errors.hpp"

namespace mil {

double auroc(std::span<const double> scores, std::span<const int> labels) {
  if (scores.size() != labels.size()) throw InputError("auroc: scores and labels differ in length");
  std::size_t n_pos = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] != 0 && labels[i] != 1) throw InputError("auroc: labels must be 0 or 1");
    if (!std::isfinite(scores[i])) throw InputError("auroc: non-finite score");
    n_pos += static_cast<std::size_t>(labels[i]);
  }
  const std::size_t n_neg = labels.size() - n_pos;
  if (n_pos == 0 || n_neg == 0) throw MetricError("auroc needs at least one positive and one negative");

  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

  // Ranks are doubled so that tied averages stay integral.
  unsigned long long pos_rank_sum2 = 0;
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j < order.size() && scores[order[j]] == scores[order[i]]) ++j;
    const unsigned long long avg2 = i + j + 1;  // 2 * mean of 1-based ranks i+1..j
    for (std::size_t t = i; t < j; ++t) {
      if (labels[order[t]] == 1) pos_rank_sum2 += avg2;
    }
    i = j;
  }
  // 2U = 2 * sum(pos ranks) - n_pos (n_pos + 1)
  const unsigned long long u2 = pos_rank_sum2 - static_cast<unsigned long long>(n_pos) * (n_pos + 1);
  return (static_cast<double>(u2) / 2.0) / (static_cast<double>(n_pos) * static_cast<double>(n_neg));
}

}  // namespace mil
