#pragma once

#include <span>

namespace mil {

// Exact area under the ROC curve via the Mann-Whitney statistic:
// (concordant pairs + ties / 2) / (n_pos * n_neg), computed from average ranks
// in O(n log n). Throws MetricError unless both classes are present and
// InputError on mismatched lengths, non-binary labels or non-finite scores.
double auroc(std::span<const double> scores, std::span<const int> labels);

}  // namespace mil
