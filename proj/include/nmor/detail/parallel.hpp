#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <thread>
#include <vector>

namespace nmor::detail {

inline unsigned default_workers() {
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1u : hw;
}

/// Calls fn(i) for i in [0, n) on a small pool.  Results land at their own
/// index, so the output order never depends on scheduling.  fn must not
/// throw; callers isolate failures themselves.
template <class Fn>
void parallel_for(std::size_t n, Fn fn, unsigned workers = 0) {
  if (workers == 0) workers = default_workers();
  workers = static_cast<unsigned>(std::min<std::size_t>(workers, n));
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::jthread> pool;
  pool.reserve(workers);
  for (unsigned w = 0; w < workers; ++w)
    pool.emplace_back([&] {
      for (std::size_t i = next.fetch_add(1); i < n; i = next.fetch_add(1)) fn(i);
    });
}

/// parallel_for that rethrows the first (lowest-index) exception.
template <class Fn>
void parallel_for_rethrow(std::size_t n, Fn fn, unsigned workers = 0) {
  std::vector<std::exception_ptr> errors(n);
  parallel_for(
      n,
      [&](std::size_t i) {
        try {
          fn(i);
        } catch (...) {
          errors[i] = std::current_exception();
        }
      },
      workers);
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

}  // namespace nmor::detail
