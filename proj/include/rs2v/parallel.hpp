// Minimal data-parallel helper.

#pragma once

#include <algorithm>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace rs2v {

/// 0 or negative means "use all hardware threads".
inline unsigned resolve_thread_count(int requested) {
  if (requested > 0) return static_cast<unsigned>(requested);
  const unsigned hc = std::thread::hardware_concurrency();
  return hc > 0 ? hc : 1;
}

/// Invokes fn(begin, end) over disjoint contiguous chunks of [0, n), possibly
/// concurrently. Callers must only write per-index state so the result is
/// independent of scheduling. The first worker exception is rethrown.
template <typename Fn>
void parallel_for_chunks(std::size_t n, Fn&& fn, int threads = 0) {
  if (n == 0) return;
  const unsigned workers =
      std::min<std::size_t>(resolve_thread_count(threads), n);
  if (workers <= 1) {
    fn(std::size_t{0}, n);
    return;
  }

  std::mutex error_mu;
  std::exception_ptr first_error;
  std::vector<std::thread> pool;
  pool.reserve(workers);
  const std::size_t chunk = (n + workers - 1) / workers;
  for (unsigned w = 0; w < workers; ++w) {
    const std::size_t begin = w * chunk;
    const std::size_t end = std::min(n, begin + chunk);
    if (begin >= end) break;
    pool.emplace_back([&, begin, end] {
      try {
        fn(begin, end);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mu);
        if (!first_error) first_error = std::current_exception();
      }
    });
  }
  for (std::thread& t : pool) t.join();
  if (first_error) std::rethrow_exception(first_error);
}

}  // namespace rs2v
