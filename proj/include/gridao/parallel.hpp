#pragma once

#include <algorithm>
#include <cstddef>
#include <exception>
#include <limits>
#include <thread>
#include <utility>
#include <vector>

namespace gridao {

inline unsigned resolve_thread_count(unsigned requested) {
  if (requested != 0) return requested;
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : hw;
}

// Runs fn(i) for i in [begin, end), statically partitioned into contiguous
// blocks, one block per thread. fn must write only to slots owned by index i,
// which makes the result independent of the thread count. If several calls
// throw, the exception from the smallest index is rethrown.
template <typename Fn>
void parallel_for(std::size_t begin, std::size_t end, unsigned num_threads, Fn&& fn) {
  const std::size_t total = end > begin ? end - begin : 0;
  if (total == 0) return;

  std::size_t threads = resolve_thread_count(num_threads);
  threads = std::min(threads, total);
  if (threads <= 1) {
    for (std::size_t i = begin; i < end; ++i) fn(i);
    return;
  }

  struct Failure {
    std::size_t index = std::numeric_limits<std::size_t>::max();
    std::exception_ptr error;
  };
  std::vector<Failure> failures(threads);
  std::vector<std::thread> pool;
  pool.reserve(threads);
  const std::size_t chunk = (total + threads - 1) / threads;

  for (std::size_t t = 0; t < threads; ++t) {
    const std::size_t lo = begin + t * chunk;
    const std::size_t hi = std::min(end, lo + chunk);
    if (lo >= hi) break;
    pool.emplace_back([&fn, &failures, t, lo, hi] {
      for (std::size_t i = lo; i < hi; ++i) {
        try {
          fn(i);
        } catch (...) {
          failures[t] = {i, std::current_exception()};
          return;
        }
      }
    });
  }
  for (auto& th : pool) th.join();

  const Failure* first = nullptr;
  for (const auto& f : failures) {
    if (f.error && (first == nullptr || f.index < first->index)) first = &f;
  }
  if (first != nullptr) std::rethrow_exception(first->error);
}

}  // namespace gridao
