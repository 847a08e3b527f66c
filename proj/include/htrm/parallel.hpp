#pragma once

// Minimal fork-join loop. Workers pull indices from a shared counter and
// write results into per-index slots, so the output never depends on the
// worker count or on scheduling.

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace htrm {

/// 0 means one worker per hardware thread.
inline int resolve_workers(int requested) {
  if (requested > 0) return requested;
  return static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
}

/// Calls f(i) for every i in [0, count). The first exception thrown by any
/// worker stops further work and is rethrown on the calling thread.
template <class F>
void parallel_for(std::size_t count, int workers, F&& f) {
  const auto n_workers = static_cast<std::size_t>(std::min<std::size_t>(resolve_workers(workers), std::max<std::size_t>(count, 1)));
  if (n_workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) f(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::atomic<bool> failed{false};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto body = [&] {
    for (;;) {
      if (failed.load(std::memory_order_relaxed)) return;
      const std::size_t i = next.fetch_add(1, std::memory_order_relaxed);
      if (i >= count) return;
      try {
        f(i);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
        failed = true;
        return;
      }
    }
  };
  std::vector<std::jthread> pool;
  pool.reserve(n_workers - 1);
  for (std::size_t w = 1; w < n_workers; ++w) pool.emplace_back(body);
  body();
  pool.clear();
  if (error) std::rethrow_exception(error);
}

}  // namespace htrm
