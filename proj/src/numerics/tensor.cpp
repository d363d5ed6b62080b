#include "mil/numerics/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "mil/errors.hpp"

namespace mil {

std::string shape_string(const Shape& shape) {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) os << ',';
    os << shape[i];
  }
  os << ']';
  return os.str();
}

std::size_t shape_product(const Shape& shape) {
  std::size_t n = 1;
  for (auto d : shape) n *= d;
  return n;
}

Tensor::Tensor(Shape shape, double fill) : shape_(std::move(shape)), data_(shape_product(shape_), fill) {}

Tensor Tensor::from_data(Shape shape, std::span<const double> values) {
  if (shape_product(shape) != values.size()) {
    throw DimensionError("tensor shape " + shape_string(shape) + " needs " + std::to_string(shape_product(shape)) +
                         " values, got " + std::to_string(values.size()));
  }
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!std::isfinite(values[i])) {
      throw InputError("non-finite value at flat index " + std::to_string(i));
    }
  }
  Tensor t(std::move(shape));
  std::copy(values.begin(), values.end(), t.data_.begin());
  return t;
}

Tensor Tensor::matrix(std::size_t rows, std::size_t cols, std::initializer_list<double> values) {
  return from_data({rows, cols}, std::span<const double>(values.begin(), values.size()));
}

Tensor Tensor::identity(std::size_t n) {
  Tensor t({n, n});
  for (std::size_t i = 0; i < n; ++i) t(i, i) = 1.0;
  return t;
}

Tensor::Tensor(const Tensor& other)
    : shape_(other.shape_),
      data_(other.data_),
      grad_(other.grad_ ? std::make_unique<Tensor>(*other.grad_) : nullptr) {}

Tensor& Tensor::operator=(const Tensor& other) {
  if (this != &other) {
    shape_ = other.shape_;
    data_ = other.data_;
    grad_ = other.grad_ ? std::make_unique<Tensor>(*other.grad_) : nullptr;
  }
  return *this;
}

std::size_t Tensor::rows() const noexcept {
  if (shape_.empty()) return 1;
  return shape_.size() == 1 ? 1 : shape_[0];
}

std::size_t Tensor::cols() const noexcept {
  if (shape_.empty()) return 1;
  return shape_.size() == 1 ? shape_[0] : shape_[1];
}

void Tensor::fill(double v) noexcept { std::fill(data_.begin(), data_.end(), v); }

bool Tensor::all_finite() const noexcept {
  return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
}

Tensor Tensor::reshaped(Shape shape) const {
  if (shape_product(shape) != size()) {
    throw DimensionError("cannot reshape " + shape_string(shape_) + " to " + shape_string(shape));
  }
  Tensor t = *this;
  t.shape_ = std::move(shape);
  t.grad_.reset();
  return t;
}

Tensor& Tensor::grad() {
  if (!grad_) grad_ = std::make_unique<Tensor>(shape_);
  return *grad_;
}

void expect_matrix(const Tensor& t, std::size_t rows, std::size_t cols, const char* what) {
  const bool ok = t.rank() == 2 && (rows == 0 || t.shape()[0] == rows) && (cols == 0 || t.shape()[1] == cols);
  if (!ok) {
    Shape want{rows, cols};
    throw DimensionError(std::string(what) + ": expected matrix " + shape_string(want) + " (0 = any), got " +
                         shape_string(t.shape()));
  }
}

}  // namespace mil
