#pragma once

#include <algorithm>
#include <cstdint>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace compobs {

/// Runs fn(i) for every i in [0, n) across worker threads.  threads <= 0 picks
/// the hardware concurrency.  Work is split into contiguous static chunks, so
/// callers that derive per-index seeds get identical results for any thread
/// count; shared accumulators must be reduced with order-independent updates
/// (atomics or per-thread sums).  The first exception thrown by any worker is
/// rethrown on the calling thread after all workers join.
template <class F>
void parallel_for(std::int64_t n, F&& fn, int threads = 0) {
  if (n <= 0) return;
  if (threads <= 0) threads = static_cast<int>(std::thread::hardware_concurrency());
  if (threads < 1) threads = 1;
  if (threads > n) threads = static_cast<int>(n);
  if (threads == 1) {
    for (std::int64_t i = 0; i < n; ++i) fn(i);
    return;
  }

  std::mutex error_lock;
  std::exception_ptr error;
  std::vector<std::thread> workers;
  workers.reserve(static_cast<std::size_t>(threads));
  for (int t = 0; t < threads; ++t) {
    const std::int64_t begin = n * t / threads;
    const std::int64_t end = n * (t + 1) / threads;
    workers.emplace_back([&, begin, end] {
      try {
        for (std::int64_t i = begin; i < end; ++i) fn(i);
      } catch (...) {
        const std::lock_guard<std::mutex> hold(error_lock);
        if (!error) error = std::current_exception();
      }
    });
  }
  for (auto& w : workers) w.join();
  if (error) std::rethrow_exception(error);
}

}  // namespace compobs
