#pragma once

#include <cstddef>

// Raw row-major kernels behind the tensor ops. Two implementations with the
// same signatures:
//   serial::  straightforward loops, the reference used by tests
//   omp::     OpenMP-parallel over output rows
// Both accumulate every output element in the same order, so their results
// are bit-identical; tests assert this.
namespace mil::kernels {

struct GemmDims {
  std::size_t m;  // output rows
  std::size_t k;  // contraction length
  std::size_t n;  // output cols
};

namespace serial {
// C[m,n] (+)= A[m,k] * B[k,n]
void gemm_nn(GemmDims d, const double* a, const double* b, double* c, bool accumulate);
// C[m,n] (+)= A[k,m]^T * B[k,n]
void gemm_tn(GemmDims d, const double* a, const double* b, double* c, bool accumulate);
// C[m,n] (+)= A[m,k] * B[n,k]^T
void gemm_nt(GemmDims d, const double* a, const double* b, double* c, bool accumulate);
void softmax_rows(std::size_t rows, std::size_t cols, const double* x, double* y);
void gelu(std::size_t n, const double* x, double* y);
}  // namespace serial

namespace omp {
void gemm_nn(GemmDims d, const double* a, const double* b, double* c, bool accumulate);
void gemm_tn(GemmDims d, const double* a, const double* b, double* c, bool accumulate);
void gemm_nt(GemmDims d, const double* a, const double* b, double* c, bool accumulate);
void softmax_rows(std::size_t rows, std::size_t cols, const double* x, double* y);
void gelu(std::size_t n, const double* x, double* y);
}  // namespace omp

// Number of threads an omp:: kernel would use at the current nesting level.
int available_threads();

}  // namespace mil::kernels
