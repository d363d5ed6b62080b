#pragma once

namespace mil {

struct CosineSchedule {
  double period = 10.0;  // epochs
  double eta_max = 2e-4;
  double eta_min = 1e-6;

  void validate() const;
};

// eta_min + (eta_max - eta_min) * (1 + cos(pi t / T)) / 2 for 0 <= t <= T,
// eta_min afterwards. The endpoints are returned exactly.
double cosine_lr(double t, const CosineSchedule& s = {});

}  // namespace mil
