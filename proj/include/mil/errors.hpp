#pragma once

#include <stdexcept>
#include <string>

namespace mil {

// Incompatible tensor shapes passed to a kernel or layer.
class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Hyperparameter or configuration value outside its valid range.
class ParameterError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Malformed caller input (empty bag, unknown label, non-finite data).
class InputError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A caller-supplied function violated its contract (e.g. non-deterministic loss).
class ContractError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// Optimizer state not aligned with the parameters it tracks.
class StateError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// Metric undefined for the given input (e.g. AUROC with one class).
class MetricError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Training produced a non-finite loss.
class TrainingError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace mil
