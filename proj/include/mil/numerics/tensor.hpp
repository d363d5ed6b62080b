#pragma once

#include <cstddef>
#include <initializer_list>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "mil/numerics/memory.hpp"

namespace mil {

using Shape = std::vector<std::size_t>;
using Storage = std::vector<double, memory::TrackingAllocator<double>>;

std::string shape_string(const Shape& shape);
std::size_t shape_product(const Shape& shape);

// Dense row-major float64 array with an optional same-shape gradient slot.
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(Shape shape, double fill = 0.0);

  // Validating constructor for data coming from outside the process
  // (files, user input): rejects size mismatch and non-finite values.
  static Tensor from_data(Shape shape, std::span<const double> values);
  static Tensor matrix(std::size_t rows, std::size_t cols, std::initializer_list<double> values);
  static Tensor identity(std::size_t n);

  Tensor(const Tensor& other);
  Tensor& operator=(const Tensor& other);
  Tensor(Tensor&&) noexcept = default;
  Tensor& operator=(Tensor&&) noexcept = default;

  const Shape& shape() const noexcept { return shape_; }
  std::size_t rank() const noexcept { return shape_.size(); }
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }
  // Matrix view of a rank-1 or rank-2 tensor; rank-1 is treated as one row.
  std::size_t rows() const noexcept;
  std::size_t cols() const noexcept;

  double* data() noexcept { return data_.data(); }
  const double* data() const noexcept { return data_.data(); }
  std::span<double> values() noexcept { return {data_.data(), data_.size()}; }
  std::span<const double> values() const noexcept { return {data_.data(), data_.size()}; }

  double& operator[](std::size_t i) noexcept { return data_[i]; }
  double operator[](std::size_t i) const noexcept { return data_[i]; }
  double& operator()(std::size_t r, std::size_t c) noexcept { return data_[r * cols() + c]; }
  double operator()(std::size_t r, std::size_t c) const noexcept { return data_[r * cols() + c]; }

  std::span<double> row(std::size_t r) noexcept { return {data_.data() + r * cols(), cols()}; }
  std::span<const double> row(std::size_t r) const noexcept { return {data_.data() + r * cols(), cols()}; }

  void fill(double v) noexcept;
  bool same_shape(const Tensor& other) const noexcept { return shape_ == other.shape_; }
  bool all_finite() const noexcept;
  Tensor reshaped(Shape shape) const;

  bool has_grad() const noexcept { return grad_ != nullptr; }
  // Creates a zero gradient on first access.
  Tensor& grad();
  const Tensor* grad_if_present() const noexcept { return grad_.get(); }
  void drop_grad() noexcept { grad_.reset(); }

 private:
  Shape shape_;
  Storage data_;
  std::unique_ptr<Tensor> grad_;
};

// Throws DimensionError unless the tensor is rank 2 with the given extents
// (0 means "any").
void expect_matrix(const Tensor& t, std::size_t rows, std::size_t cols, const char* what);

}  // namespace mil
