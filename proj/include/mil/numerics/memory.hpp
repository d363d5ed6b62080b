#pragma once

#include <cstddef>
#include <new>

namespace mil::memory {

// Process-wide accounting of tensor storage. Used by the benchmark to report
// peak working-set size of a forward/backward pass.
void record_alloc(std::size_t bytes) noexcept;
void record_free(std::size_t bytes) noexcept;
std::size_t live_bytes() noexcept;
std::size_t peak_bytes() noexcept;
// Resets the peak to the current live size.
void reset_peak() noexcept;

template <typename T>
struct TrackingAllocator {
  using value_type = T;

  TrackingAllocator() noexcept = default;
  template <typename U>
  TrackingAllocator(const TrackingAllocator<U>&) noexcept {}

  T* allocate(std::size_t n) {
    auto* p = static_cast<T*>(::operator new(n * sizeof(T)));
    record_alloc(n * sizeof(T));
    return p;
  }
  void deallocate(T* p, std::size_t n) noexcept {
    record_free(n * sizeof(T));
    ::operator delete(p);
  }

  template <typename U>
  bool operator==(const TrackingAllocator<U>&) const noexcept { return true; }
};

}  // namespace mil::memory
