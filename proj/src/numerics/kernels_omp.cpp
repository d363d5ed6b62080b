#include <omp.h>

#include <algorithm>
#include <cmath>
#include <cstddef>

#include "mil/numerics/kernels.hpp"

namespace mil::kernels {

namespace {
// Below this many multiply-adds the fork/join cost dominates.
constexpr std::size_t kParallelWork = 1u << 15;
}  // namespace

int available_threads() {
  return omp_get_active_level() >= omp_get_max_active_levels() ? 1 : omp_get_max_threads();
}

namespace omp {

void gemm_nn(GemmDims d, const double* a, const double* b, double* c, bool accumulate) {
  const auto m = static_cast<std::ptrdiff_t>(d.m);
#pragma omp parallel for schedule(static) if (d.m * d.k * d.n >= kParallelWork)
  for (std::ptrdiff_t i = 0; i < m; ++i) {
    double* ci = c + i * d.n;
    if (!accumulate) std::fill(ci, ci + d.n, 0.0);
    for (std::size_t t = 0; t < d.k; ++t) {
      const double av = a[i * d.k + t];
      const double* bt = b + t * d.n;
      for (std::size_t j = 0; j < d.n; ++j) ci[j] += av * bt[j];
    }
  }
}

void gemm_tn(GemmDims d, const double* a, const double* b, double* c, bool accumulate) {
  const auto m = static_cast<std::ptrdiff_t>(d.m);
#pragma omp parallel for schedule(static) if (d.m * d.k * d.n >= kParallelWork)
  for (std::ptrdiff_t i = 0; i < m; ++i) {
    double* ci = c + i * d.n;
    if (!accumulate) std::fill(ci, ci + d.n, 0.0);
    for (std::size_t t = 0; t < d.k; ++t) {
      const double av = a[t * d.m + i];
      const double* bt = b + t * d.n;
      for (std::size_t j = 0; j < d.n; ++j) ci[j] += av * bt[j];
    }
  }
}

void gemm_nt(GemmDims d, const double* a, const double* b, double* c, bool accumulate) {
  const auto m = static_cast<std::ptrdiff_t>(d.m);
#pragma omp parallel for schedule(static) if (d.m * d.k * d.n >= kParallelWork)
  for (std::ptrdiff_t i = 0; i < m; ++i) {
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
  const auto r_end = static_cast<std::ptrdiff_t>(rows);
#pragma omp parallel for schedule(static) if (rows * cols >= kParallelWork)
  for (std::ptrdiff_t r = 0; r < r_end; ++r) {
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
  const auto end = static_cast<std::ptrdiff_t>(n);
#pragma omp parallel for schedule(static) if (n >= kParallelWork)
  for (std::ptrdiff_t i = 0; i < end; ++i) y[i] = 0.5 * x[i] * std::erfc(-x[i] * M_SQRT1_2);
}

}  // namespace omp
}  // namespace mil::kernels
