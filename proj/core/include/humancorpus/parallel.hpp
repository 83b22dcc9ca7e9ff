#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <limits>
#include <mutex>
#include <thread>
#include <vector>

namespace humancorpus {

/// Calls fn(i) for every i in [0, n) on up to `jobs` threads. Indices are
/// handed out dynamically in chunks of `grain`, so callers must write results
/// by index. After all workers join, the exception thrown at the lowest index
/// (if any) is rethrown.
template <class Fn>
void parallel_for(std::size_t n, int jobs, Fn&& fn, std::size_t grain = 64) {
  const std::size_t workers =
      std::min<std::size_t>(n, static_cast<std::size_t>(std::max(jobs, 1)));
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  grain = std::max<std::size_t>(grain, 1);
  std::atomic<std::size_t> cursor{0};
  std::mutex error_mu;
  std::exception_ptr first_error;
  std::size_t first_error_index = std::numeric_limits<std::size_t>::max();
  {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (;;) {
          const std::size_t begin = cursor.fetch_add(grain);
          if (begin >= n) return;
          const std::size_t end = std::min(n, begin + grain);
          for (std::size_t i = begin; i < end; ++i) {
            try {
              fn(i);
            } catch (...) {
              std::lock_guard lock(error_mu);
              if (i < first_error_index) {
                first_error_index = i;
                first_error = std::current_exception();
              }
            }
          }
        }
      });
    }
  }
  if (first_error) std::rethrow_exception(first_error);
}

}  // namespace humancorpus
