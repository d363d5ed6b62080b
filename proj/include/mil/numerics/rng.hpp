#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

namespace mil {

// Derives an independent 64-bit seed from a root seed and a label, so that
// streams are addressed by name rather than by draw order.
std::uint64_t derive_seed(std::uint64_t root, std::string_view label) noexcept;

// FNV-1a over bytes; also used for config hashing.
std::uint64_t fnv1a64(std::string_view bytes) noexcept;

// Seeded random stream threaded explicitly through every stochastic operation.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  Rng child(std::string_view label) { return Rng(derive_seed(engine_(), label)); }

  std::uint64_t next_u64() { return engine_(); }
  // Uniform in [0, 1).
  double uniform() { return std::uniform_real_distribution<double>(0.0, 1.0)(engine_); }
  double normal(double mean = 0.0, double stddev = 1.0) {
    return std::normal_distribution<double>(mean, stddev)(engine_);
  }
  double gamma(double shape) { return std::gamma_distribution<double>(shape, 1.0)(engine_); }
  // Uniform integer in [0, n).
  std::size_t index(std::size_t n) { return std::uniform_int_distribution<std::size_t>(0, n - 1)(engine_); }
  std::size_t uniform_int(std::size_t lo, std::size_t hi) {
    return std::uniform_int_distribution<std::size_t>(lo, hi)(engine_);
  }

  // Fisher-Yates with our own index draws so the result does not depend on
  // the standard library's shuffle implementation.
  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::swap(v[i - 1], v[index(i)]);
    }
  }

  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
};

}  // namespace mil
