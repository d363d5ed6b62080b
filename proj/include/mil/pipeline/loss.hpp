#pragma once

namespace mil {

struct LossValue {
  double loss;
  double dlogit;  // d loss / d logit
};

// Binary cross-entropy on a raw logit, written with softplus so it never
// overflows. pos_weight scales the positive-class term; with the default of 1
// the gradient is sigmoid(logit) - label.
LossValue bce_with_logits(double logit, int label, double pos_weight = 1.0);

double softplus(double x) noexcept;
double sigmoid(double x) noexcept;

}  // namespace mil
