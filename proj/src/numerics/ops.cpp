#include "mil/numerics/ops.hpp"

#include <cmath>
#include <numbers>

#include "mil/errors.hpp"
#include "mil/numerics/kernels.hpp"

namespace mil {
namespace {

void require_same_shape(const Tensor& a, const Tensor& b, const char* what) {
  if (!a.same_shape(b)) {
    throw DimensionError(std::string(what) + ": shape mismatch " + shape_string(a.shape()) + " vs " +
                         shape_string(b.shape()));
  }
}

void require_matrix(const Tensor& t, const char* what) {
  if (t.rank() != 2) throw DimensionError(std::string(what) + ": expected rank-2 tensor, got " + shape_string(t.shape()));
}

}  // namespace

Tensor matmul(const Tensor& a, const Tensor& b) {
  require_matrix(a, "matmul");
  require_matrix(b, "matmul");
  if (a.cols() != b.rows()) {
    throw DimensionError("matmul: inner dimensions differ, " + shape_string(a.shape()) + " x " +
                         shape_string(b.shape()));
  }
  Tensor c({a.rows(), b.cols()});
  kernels::omp::gemm_nn({a.rows(), a.cols(), b.cols()}, a.data(), b.data(), c.data(), false);
  return c;
}

void matmul_backward(const Tensor& a, const Tensor& b, const Tensor& dc, Tensor* da, Tensor* db) {
  // dA = dC * B^T, dB = A^T * dC
  if (da) kernels::omp::gemm_nt({a.rows(), b.cols(), a.cols()}, dc.data(), b.data(), da->data(), true);
  if (db) kernels::omp::gemm_tn({b.rows(), a.rows(), b.cols()}, a.data(), dc.data(), db->data(), true);
}

Tensor matmul_nt(const Tensor& a, const Tensor& b) {
  require_matrix(a, "matmul_nt");
  require_matrix(b, "matmul_nt");
  if (a.cols() != b.cols()) {
    throw DimensionError("matmul_nt: inner dimensions differ, " + shape_string(a.shape()) + " x " +
                         shape_string(b.shape()) + "^T");
  }
  Tensor c({a.rows(), b.rows()});
  kernels::omp::gemm_nt({a.rows(), a.cols(), b.rows()}, a.data(), b.data(), c.data(), false);
  return c;
}

void matmul_nt_backward(const Tensor& a, const Tensor& b, const Tensor& dc, Tensor* da, Tensor* db) {
  // C = A B^T: dA = dC * B, dB = dC^T * A
  if (da) kernels::omp::gemm_nn({a.rows(), b.rows(), a.cols()}, dc.data(), b.data(), da->data(), true);
  if (db) kernels::omp::gemm_tn({b.rows(), a.rows(), b.cols()}, dc.data(), a.data(), db->data(), true);
}

Tensor transpose(const Tensor& a) {
  require_matrix(a, "transpose");
  Tensor t({a.cols(), a.rows()});
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) t(j, i) = a(i, j);
  return t;
}

Tensor add(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "add");
  Tensor c = a;
  add_into(c, b);
  return c;
}

void add_into(Tensor& dst, const Tensor& src) {
  require_same_shape(dst, src, "add_into");
  double* d = dst.data();
  const double* s = src.data();
  for (std::size_t i = 0; i < dst.size(); ++i) d[i] += s[i];
}

void add_scaled_into(Tensor& dst, const Tensor& src, double scale) {
  require_same_shape(dst, src, "add_scaled_into");
  double* d = dst.data();
  const double* s = src.data();
  for (std::size_t i = 0; i < dst.size(); ++i) d[i] += scale * s[i];
}

Tensor scale(const Tensor& x, double s) {
  Tensor y = x;
  for (auto& v : y.values()) v *= s;
  return y;
}

Tensor hadamard(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "hadamard");
  Tensor c(a.shape());
  for (std::size_t i = 0; i < a.size(); ++i) c[i] = a[i] * b[i];
  return c;
}

Tensor add_row(const Tensor& x, const Tensor& bias) {
  if (bias.size() != x.cols()) {
    throw DimensionError("add_row: bias " + shape_string(bias.shape()) + " does not match " + shape_string(x.shape()));
  }
  Tensor y = x;
  const std::size_t n = x.cols();
  for (std::size_t i = 0; i < x.rows(); ++i) {
    double* r = y.data() + i * n;
    for (std::size_t j = 0; j < n; ++j) r[j] += bias[j];
  }
  return y;
}

void column_sum_into(const Tensor& dy, Tensor& db) {
  const std::size_t n = dy.cols();
  for (std::size_t i = 0; i < dy.rows(); ++i) {
    const double* r = dy.data() + i * n;
    for (std::size_t j = 0; j < n; ++j) db[j] += r[j];
  }
}

Tensor softmax_rows(const Tensor& x) {
  require_matrix(x, "softmax_rows");
  Tensor y(x.shape());
  kernels::omp::softmax_rows(x.rows(), x.cols(), x.data(), y.data());
  return y;
}

Tensor softmax_rows_backward(const Tensor& y, const Tensor& dy) {
  require_same_shape(y, dy, "softmax_rows_backward");
  Tensor dx(y.shape());
  const std::size_t n = y.cols();
  for (std::size_t i = 0; i < y.rows(); ++i) {
    const double* yr = y.data() + i * n;
    const double* gr = dy.data() + i * n;
    double s = 0.0;
    for (std::size_t j = 0; j < n; ++j) s += yr[j] * gr[j];
    double* dr = dx.data() + i * n;
    for (std::size_t j = 0; j < n; ++j) dr[j] = yr[j] * (gr[j] - s);
  }
  return dx;
}

Tensor gelu(const Tensor& x) {
  Tensor y(x.shape());
  kernels::omp::gelu(x.size(), x.data(), y.data());
  return y;
}

Tensor gelu_backward(const Tensor& x, const Tensor& dy) {
  require_same_shape(x, dy, "gelu_backward");
  // d/dx x*Phi(x) = Phi(x) + x*phi(x)
  const double inv_sqrt_2pi = 0.5 * std::numbers::inv_sqrtpi * std::numbers::sqrt2;
  Tensor dx(x.shape());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double v = x[i];
    const double cdf = 0.5 * std::erfc(-v * M_SQRT1_2);
    const double pdf = inv_sqrt_2pi * std::exp(-0.5 * v * v);
    dx[i] = dy[i] * (cdf + v * pdf);
  }
  return dx;
}

Tensor sigmoid(const Tensor& x) {
  Tensor y(x.shape());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double v = x[i];
    if (v >= 0) {
      y[i] = 1.0 / (1.0 + std::exp(-v));
    } else {
      const double e = std::exp(v);
      y[i] = e / (1.0 + e);
    }
  }
  return y;
}

Tensor sigmoid_backward(const Tensor& y, const Tensor& dy) {
  require_same_shape(y, dy, "sigmoid_backward");
  Tensor dx(y.shape());
  for (std::size_t i = 0; i < y.size(); ++i) dx[i] = dy[i] * y[i] * (1.0 - y[i]);
  return dx;
}

Tensor tanh(const Tensor& x) {
  Tensor y(x.shape());
  for (std::size_t i = 0; i < x.size(); ++i) y[i] = std::tanh(x[i]);
  return y;
}

Tensor tanh_backward(const Tensor& y, const Tensor& dy) {
  require_same_shape(y, dy, "tanh_backward");
  Tensor dx(y.shape());
  for (std::size_t i = 0; i < y.size(); ++i) dx[i] = dy[i] * (1.0 - y[i] * y[i]);
  return dx;
}

Tensor layer_norm(const Tensor& x, const Tensor& gamma, const Tensor& beta, double eps, LayerNormCache* cache) {
  require_matrix(x, "layer_norm");
  const std::size_t m = x.rows();
  const std::size_t d = x.cols();
  if (d == 0) throw DimensionError("layer_norm: feature dimension must be >= 1");
  if (gamma.size() != d || beta.size() != d) {
    throw DimensionError("layer_norm: gamma/beta " + shape_string(gamma.shape()) + "/" + shape_string(beta.shape()) +
                         " do not match " + shape_string(x.shape()));
  }
  Tensor y(x.shape());
  Tensor normalized(x.shape());
  std::vector<double> inv_std(m);
  for (std::size_t i = 0; i < m; ++i) {
    const double* xr = x.data() + i * d;
    double mean = 0.0;
    for (std::size_t j = 0; j < d; ++j) mean += xr[j];
    mean /= static_cast<double>(d);
    double var = 0.0;
    for (std::size_t j = 0; j < d; ++j) var += (xr[j] - mean) * (xr[j] - mean);
    var /= static_cast<double>(d);
    const double is = 1.0 / std::sqrt(var + eps);
    inv_std[i] = is;
    double* nr = normalized.data() + i * d;
    double* yr = y.data() + i * d;
    for (std::size_t j = 0; j < d; ++j) {
      nr[j] = (xr[j] - mean) * is;
      yr[j] = nr[j] * gamma[j] + beta[j];
    }
  }
  if (cache) {
    cache->normalized = std::move(normalized);
    cache->inv_std = std::move(inv_std);
  }
  return y;
}

Tensor layer_norm_backward(const LayerNormCache& cache, const Tensor& gamma, const Tensor& dy, Tensor* dgamma,
                           Tensor* dbeta) {
  const Tensor& xh = cache.normalized;
  require_same_shape(xh, dy, "layer_norm_backward");
  const std::size_t m = xh.rows();
  const std::size_t d = xh.cols();
  Tensor dx(xh.shape());
  std::vector<double> g(d);
  for (std::size_t i = 0; i < m; ++i) {
    const double* nr = xh.data() + i * d;
    const double* gr = dy.data() + i * d;
    double sum_g = 0.0;
    double sum_gx = 0.0;
    for (std::size_t j = 0; j < d; ++j) {
      g[j] = gr[j] * gamma[j];
      sum_g += g[j];
      sum_gx += g[j] * nr[j];
      if (dgamma) (*dgamma)[j] += gr[j] * nr[j];
      if (dbeta) (*dbeta)[j] += gr[j];
    }
    const double k = cache.inv_std[i] / static_cast<double>(d);
    double* dr = dx.data() + i * d;
    for (std::size_t j = 0; j < d; ++j) {
      dr[j] = k * (static_cast<double>(d) * g[j] - sum_g - nr[j] * sum_gx);
    }
  }
  return dx;
}

Tensor dropout(const Tensor& x, double p, Mode mode, Rng& rng, DropoutMask* mask) {
  if (!(p >= 0.0 && p < 1.0)) throw ParameterError("dropout: p must lie in [0, 1), got " + std::to_string(p));
  if (mask) mask->scale.clear();
  if (mode == Mode::eval || p == 0.0) return x;
  const double keep_scale = 1.0 / (1.0 - p);
  std::vector<double> s(x.size());
  Tensor y(x.shape());
  for (std::size_t i = 0; i < x.size(); ++i) {
    s[i] = rng.uniform() < p ? 0.0 : keep_scale;
    y[i] = x[i] * s[i];
  }
  if (mask) mask->scale = std::move(s);
  return y;
}

Tensor dropout_backward(const DropoutMask& mask, const Tensor& dy) {
  if (mask.scale.empty()) return dy;
  if (mask.scale.size() != dy.size()) throw DimensionError("dropout_backward: mask size mismatch");
  Tensor dx(dy.shape());
  for (std::size_t i = 0; i < dy.size(); ++i) dx[i] = dy[i] * mask.scale[i];
  return dx;
}

Tensor mean_rows(const Tensor& x) {
  require_matrix(x, "mean_rows");
  if (x.rows() == 0) throw DimensionError("mean_rows: no rows");
  Tensor y({1, x.cols()});
  column_sum_into(x, y);
  const double inv = 1.0 / static_cast<double>(x.rows());
  for (auto& v : y.values()) v *= inv;
  return y;
}

Tensor mean_rows_backward(const Tensor& dy, std::size_t rows) {
  const std::size_t n = dy.size();
  Tensor dx({rows, n});
  const double inv = 1.0 / static_cast<double>(rows);
  for (std::size_t i = 0; i < rows; ++i)
    for (std::size_t j = 0; j < n; ++j) dx(i, j) = dy[j] * inv;
  return dx;
}

Tensor slice_cols(const Tensor& x, std::size_t begin, std::size_t count) {
  require_matrix(x, "slice_cols");
  if (begin + count > x.cols()) throw DimensionError("slice_cols: range exceeds " + shape_string(x.shape()));
  Tensor y({x.rows(), count});
  for (std::size_t i = 0; i < x.rows(); ++i)
    for (std::size_t j = 0; j < count; ++j) y(i, j) = x(i, begin + j);
  return y;
}

void add_cols_into(Tensor& dst, const Tensor& src, std::size_t begin) {
  if (dst.rows() != src.rows() || begin + src.cols() > dst.cols()) {
    throw DimensionError("add_cols_into: " + shape_string(src.shape()) + " does not fit " + shape_string(dst.shape()));
  }
  for (std::size_t i = 0; i < src.rows(); ++i)
    for (std::size_t j = 0; j < src.cols(); ++j) dst(i, begin + j) += src(i, j);
}

void write_cols(Tensor& dst, const Tensor& src, std::size_t begin) {
  if (dst.rows() != src.rows() || begin + src.cols() > dst.cols()) {
    throw DimensionError("write_cols: " + shape_string(src.shape()) + " does not fit " + shape_string(dst.shape()));
  }
  for (std::size_t i = 0; i < src.rows(); ++i)
    for (std::size_t j = 0; j < src.cols(); ++j) dst(i, begin + j) = src(i, j);
}

double sum(const Tensor& x) {
  double s = 0.0;
  for (double v : x.values()) s += v;
  return s;
}

double dot(const Tensor& a, const Tensor& b) {
  require_same_shape(a, b, "dot");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

}  // namespace mil
