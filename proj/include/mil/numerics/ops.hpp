#pragma once

#include <cstddef>
#include <vector>

#include "mil/numerics/rng.hpp"
#include "mil/numerics/tensor.hpp"

// Tensor ops with hand-written backward passes. Forward functions are pure;
// backward functions take whatever the forward pass saved and either return
// the input gradient or accumulate into caller-owned gradient tensors
// (nullptr means "not needed").
namespace mil {

enum class Mode { train, eval };

// c = a * b
Tensor matmul(const Tensor& a, const Tensor& b);
void matmul_backward(const Tensor& a, const Tensor& b, const Tensor& dc, Tensor* da, Tensor* db);

// c = a * b^T
Tensor matmul_nt(const Tensor& a, const Tensor& b);
void matmul_nt_backward(const Tensor& a, const Tensor& b, const Tensor& dc, Tensor* da, Tensor* db);

Tensor transpose(const Tensor& a);

Tensor add(const Tensor& a, const Tensor& b);
void add_into(Tensor& dst, const Tensor& src);
void add_scaled_into(Tensor& dst, const Tensor& src, double scale);
Tensor scale(const Tensor& x, double s);
Tensor hadamard(const Tensor& a, const Tensor& b);

// x[m,n] + bias[n] broadcast over rows
Tensor add_row(const Tensor& x, const Tensor& bias);
// db += column sums of dy
void column_sum_into(const Tensor& dy, Tensor& db);

Tensor softmax_rows(const Tensor& x);
// Per-row Jacobian-vector product; y is the forward output.
Tensor softmax_rows_backward(const Tensor& y, const Tensor& dy);

// Exact x * Phi(x).
Tensor gelu(const Tensor& x);
Tensor gelu_backward(const Tensor& x, const Tensor& dy);

Tensor sigmoid(const Tensor& x);
Tensor sigmoid_backward(const Tensor& y, const Tensor& dy);
Tensor tanh(const Tensor& x);
Tensor tanh_backward(const Tensor& y, const Tensor& dy);

struct LayerNormCache {
  Tensor normalized;
  std::vector<double> inv_std;
};

constexpr double kLayerNormEps = 1e-5;

Tensor layer_norm(const Tensor& x, const Tensor& gamma, const Tensor& beta, double eps = kLayerNormEps,
                  LayerNormCache* cache = nullptr);
Tensor layer_norm_backward(const LayerNormCache& cache, const Tensor& gamma, const Tensor& dy, Tensor* dgamma,
                           Tensor* dbeta);

// Multiplier per element (0 or 1/(1-p)); empty means the identity was applied.
struct DropoutMask {
  std::vector<double> scale;
};

// Inverted dropout. Eval mode and p == 0 return the input unchanged.
Tensor dropout(const Tensor& x, double p, Mode mode, Rng& rng, DropoutMask* mask = nullptr);
Tensor dropout_backward(const DropoutMask& mask, const Tensor& dy);

// Column means of x[m,n] as a [1,n] tensor.
Tensor mean_rows(const Tensor& x);
Tensor mean_rows_backward(const Tensor& dy, std::size_t rows);

Tensor slice_cols(const Tensor& x, std::size_t begin, std::size_t count);
// dst[:, begin:begin+src.cols] += src
void add_cols_into(Tensor& dst, const Tensor& src, std::size_t begin);
// dst[:, begin:begin+src.cols] = src
void write_cols(Tensor& dst, const Tensor& src, std::size_t begin);

double sum(const Tensor& x);
double dot(const Tensor& a, const Tensor& b);

}  // namespace mil
