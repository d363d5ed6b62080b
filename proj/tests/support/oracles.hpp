#pragma once

// Independent reference implementations used only by tests. Written as plain
// loops over std::vector where possible so they share no code with the
// library kernels they check.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <vector>

#include "mil/numerics/ops.hpp"
#include "mil/numerics/rng.hpp"
#include "mil/numerics/tensor.hpp"

namespace oracle {

inline mil::Tensor random_tensor(mil::Shape shape, mil::Rng& rng, double scale = 1.0) {
  mil::Tensor t(std::move(shape));
  for (auto& v : t.values()) v = scale * rng.normal();
  return t;
}

inline mil::Tensor triple_loop_matmul(const mil::Tensor& a, const mil::Tensor& b) {
  const std::size_t m = a.rows(), k = a.cols(), n = b.cols();
  mil::Tensor c({m, n});
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      double s = 0.0;
      for (std::size_t t = 0; t < k; ++t) s += a(i, t) * b(t, j);
      c(i, j) = s;
    }
  return c;
}

inline std::vector<double> exp_normalize(const std::vector<double>& row) {
  std::vector<double> out(row.size());
  double z = 0.0;
  for (std::size_t i = 0; i < row.size(); ++i) z += out[i] = std::exp(row[i]);
  for (auto& v : out) v /= z;
  return out;
}

inline double gaussian_cdf(double x) { return 0.5 * (1.0 + std::erf(x / std::sqrt(2.0))); }

inline double max_abs_diff(const mil::Tensor& a, const mil::Tensor& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

// (concordant + ties / 2) / (P N) by looking at every pair.
inline double pair_count_auroc(const std::vector<double>& s, const std::vector<int>& y) {
  double good = 0.0;
  double pairs = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (y[i] != 1) continue;
    for (std::size_t j = 0; j < s.size(); ++j) {
      if (y[j] != 0) continue;
      pairs += 1.0;
      if (s[i] > s[j]) good += 1.0;
      else if (s[i] == s[j]) good += 0.5;
    }
  }
  return good / pairs;
}

// Asymmetric attention written step by step from matmul, transpose and
// softmax_rows: per head h, take the h-th column block of the lifted queries
// and of the patches, attend, then concatenate and project down.
inline mil::Tensor asym_attention_composed(const mil::Tensor& q, const mil::Tensor& patches, const mil::Tensor& w_up,
                                           const mil::Tensor& w_down, std::size_t heads) {
  const std::size_t d_kv = patches.cols();
  const std::size_t width = d_kv / heads;
  const mil::Tensor lifted = mil::matmul(q, w_up);
  mil::Tensor concat({q.rows(), d_kv});
  for (std::size_t h = 0; h < heads; ++h) {
    mil::Tensor lq({q.rows(), width}), ph({patches.rows(), width});
    for (std::size_t r = 0; r < q.rows(); ++r)
      for (std::size_t c = 0; c < width; ++c) lq(r, c) = lifted(r, h * width + c);
    for (std::size_t r = 0; r < patches.rows(); ++r)
      for (std::size_t c = 0; c < width; ++c) ph(r, c) = patches(r, h * width + c);
    mil::Tensor scores = mil::matmul(lq, mil::transpose(ph));
    for (auto& v : scores.values()) v /= std::sqrt(static_cast<double>(d_kv));
    const mil::Tensor out = mil::matmul(mil::softmax_rows(scores), ph);
    for (std::size_t r = 0; r < q.rows(); ++r)
      for (std::size_t c = 0; c < width; ++c) concat(r, h * width + c) = out(r, c);
  }
  return mil::matmul(concat, w_down);
}

// Largest-remainder split of `total` by integer weights, using exact integer
// comparisons of the remainders (weight * total mod sum). Ties to lower index.
inline std::array<std::size_t, 3> apportion_exact(std::size_t total, const std::array<std::uint64_t, 3>& w) {
  std::array<std::size_t, 3> out{};
  const std::uint64_t sum = w[0] + w[1] + w[2];
  if (sum == 0 || total == 0) return out;
  std::array<std::uint64_t, 3> rem{};
  std::size_t given = 0;
  for (int c = 0; c < 3; ++c) {
    out[c] = static_cast<std::size_t>(w[c] * total / sum);
    rem[c] = w[c] * total % sum;
    given += out[c];
  }
  std::array<int, 3> order{0, 1, 2};
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return rem[a] > rem[b]; });
  for (int i = 0; given < total; ++i) {
    if (w[order[i % 3]] == 0) continue;
    ++out[order[i % 3]];
    ++given;
  }
  return out;
}

// Quota rule with ratios given in percent (integers), see stratified_quota.
inline std::array<std::size_t, 3> quota_exact(const std::array<std::size_t, 3>& avail, std::size_t n_target,
                                              const std::array<std::uint64_t, 3>& percent) {
  const std::size_t total = avail[0] + avail[1] + avail[2];
  const std::size_t n = std::min(n_target, total);
  if (n == total) return avail;
  auto q = apportion_exact(n, percent);
  for (;;) {
    std::size_t shortfall = 0;
    std::array<std::uint64_t, 3> spare{};
    for (int c = 0; c < 3; ++c) {
      if (q[c] > avail[c]) {
        shortfall += q[c] - avail[c];
        q[c] = avail[c];
      }
      spare[c] = avail[c] - q[c];
    }
    if (shortfall == 0) return q;
    const auto extra = apportion_exact(shortfall, spare);
    for (int c = 0; c < 3; ++c) q[c] += extra[c];
  }
}

// Bag-mean linear discriminant with ridge: fit on `fit`, score `score`.
// Returns held-out scores.
inline std::vector<double> bag_mean_lda(const std::vector<std::vector<double>>& means, const std::vector<int>& labels,
                                        const std::vector<std::size_t>& fit, const std::vector<std::size_t>& score,
                                        double ridge = 1e-3) {
  const std::size_t d = means.front().size();
  std::array<std::vector<double>, 2> mu{std::vector<double>(d, 0.0), std::vector<double>(d, 0.0)};
  std::array<double, 2> count{0.0, 0.0};
  for (auto i : fit) {
    ++count[labels[i]];
    for (std::size_t k = 0; k < d; ++k) mu[labels[i]][k] += means[i][k];
  }
  for (int c = 0; c < 2; ++c)
    for (auto& v : mu[c]) v /= count[c];
  std::vector<double> cov(d * d, 0.0);
  for (auto i : fit) {
    const auto& m = mu[labels[i]];
    for (std::size_t a = 0; a < d; ++a)
      for (std::size_t b = 0; b < d; ++b) cov[a * d + b] += (means[i][a] - m[a]) * (means[i][b] - m[b]);
  }
  for (auto& v : cov) v /= static_cast<double>(fit.size());
  for (std::size_t a = 0; a < d; ++a) cov[a * d + a] += ridge;
  // Cholesky solve cov w = mu1 - mu0.
  std::vector<double> l(d * d, 0.0);
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = 0; j <= i; ++j) {
      double s = cov[i * d + j];
      for (std::size_t k = 0; k < j; ++k) s -= l[i * d + k] * l[j * d + k];
      l[i * d + j] = i == j ? std::sqrt(s) : s / l[j * d + j];
    }
  std::vector<double> w(d), y(d);
  for (std::size_t i = 0; i < d; ++i) {
    double s = mu[1][i] - mu[0][i];
    for (std::size_t k = 0; k < i; ++k) s -= l[i * d + k] * y[k];
    y[i] = s / l[i * d + i];
  }
  for (std::size_t i = d; i-- > 0;) {
    double s = y[i];
    for (std::size_t k = i + 1; k < d; ++k) s -= l[k * d + i] * w[k];
    w[i] = s / l[i * d + i];
  }
  std::vector<double> out;
  for (auto i : score) out.push_back(std::inner_product(w.begin(), w.end(), means[i].begin(), 0.0));
  return out;
}

}  // namespace oracle
