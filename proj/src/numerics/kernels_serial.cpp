#include <algorithm>
#include <cmath>

#include "mil/numerics/kernels.hpp"

namespace mil::kernels::serial {

void gemm_nn(GemmDims d, const double* a, const double* b, double* c, bool accumulate) {
  if (!accumulate) std::fill(c, c + d.m * d.n, 0.0);
  for (std::size_t i = 0; i < d.m; ++i) {
    double* ci = c + i * d.n;
    for (std::size_t t = 0; t < d.k; ++t) {
      const double av = a[i * d.k + t];
      const double* bt = b + t * d.n;
      for (std::size_t j = 0; j < d.n; ++j) ci[j] += av * bt[j];
    }
  }
}

void gemm_tn(GemmDims d, const double* a, const double* b, double* c, bool accumulate) {
  if (!accumulate) std::fill(c, c + d.m * d.n, 0.0);
  for (std::size_t i = 0; i < d.m; ++i) {
    double* ci = c + i * d.n;
    for (std::size_t t = 0; t < d.k; ++t) {
      const double av = a[t * d.m + i];
      const double* bt = b + t * d.n;
      for (std::size_t j = 0; j < d.n; ++j) ci[j] += av * bt[j];
    }
  }
}

void gemm_nt(GemmDims d, const double* a, const double* b, double* c, bool accumulate) {
  for (std::size_t i = 0; i < d.m; ++i) {
    const double* ai = a + i * d.k;
    for (std::size_t j = 0; j < d.n; ++j) {
      const double* bj = b + j * d.k;
      double s = 0.0;
      for (std::size_t t = 0; t < d.k; ++t) s += ai[t] * bj[t];
      c[i * d.n + j] = accumulate ? c[i * d.n + j] + s : s;
    }
  }
}

void softmax_rows(std::size_t rows, std::size_t cols, const double* x, double* y) {
  for (std::size_t r = 0; r < rows; ++r) {
    const double* xr = x + r * cols;
    double* yr = y + r * cols;
    const double mx = *std::max_element(xr, xr + cols);
    double sum = 0.0;
    for (std::size_t j = 0; j < cols; ++j) {
      yr[j] = std::exp(xr[j] - mx);
      sum += yr[j];
    }
    const double inv = 1.0 / sum;
    for (std::size_t j = 0; j < cols; ++j) yr[j] *= inv;
  }
}

void gelu(std::size_t n, const double* x, double* y) {
  for (std::size_t i = 0; i < n; ++i) y[i] = 0.5 * x[i] * std::erfc(-x[i] * M_SQRT1_2);
}

}  // namespace mil::kernels::serial
