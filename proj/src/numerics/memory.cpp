#include "mil/numerics/memory.hpp"

#include <atomic>

namespace mil::memory {
namespace {
std::atomic<std::size_t> g_live{0};
std::atomic<std::size_t> g_peak{0};
}  // namespace

void record_alloc(std::size_t bytes) noexcept {
  const std::size_t now = g_live.fetch_add(bytes, std::memory_order_relaxed) + bytes;
  std::size_t peak = g_peak.load(std::memory_order_relaxed);
  while (now > peak && !g_peak.compare_exchange_weak(peak, now, std::memory_order_relaxed)) {
  }
}

void record_free(std::size_t bytes) noexcept { g_live.fetch_sub(bytes, std::memory_order_relaxed); }

std::size_t live_bytes() noexcept { return g_live.load(std::memory_order_relaxed); }

std::size_t peak_bytes() noexcept { return g_peak.load(std::memory_order_relaxed); }

void reset_peak() noexcept { g_peak.store(g_live.load(std::memory_order_relaxed), std::memory_order_relaxed); }

}  // namespace mil::memory
