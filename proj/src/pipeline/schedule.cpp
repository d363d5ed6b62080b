#include "mil/pipeline/schedule.hpp"

#include <cmath>
#include <numbers>

#include "mil/errors.hpp"

namespace mil {

void CosineSchedule::validate() const {
  if (!(period > 0.0)) throw ParameterError("scheduler period must be positive");
  if (!(eta_min >= 0.0) || !(eta_max >= eta_min)) throw ParameterError("need 0 <= eta_min <= eta_max");
}

double cosine_lr(double t, const CosineSchedule& s) {
  s.validate();
  if (!(t >= 0.0)) throw ParameterError("cosine_lr: t must be >= 0");
  if (t == 0.0) return s.eta_max;
  if (t >= s.period) return s.eta_min;
  return s.eta_min + 0.5 * (s.eta_max - s.eta_min) * (1.0 + std::cos(std::numbers::pi * t / s.period));
}

}  // namespace mil
