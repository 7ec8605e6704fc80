#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace orcs {

/// Worker count from ORCS_THREADS, else the hardware concurrency.
inline unsigned default_threads() {
  if (const char* env = std::getenv("ORCS_THREADS")) {
    const long v = std::strtol(env, nullptr, 10);
    if (v > 0) return static_cast<unsigned>(v);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

/// Static block partition of [0, n) over `threads` workers. fn(worker, begin, end)
/// is called once per non-empty block; block w always covers the same range for
/// a given (n, threads), which is what deterministic reductions rely on.
template <class Fn>
void parallel_blocks(std::size_t n, unsigned threads, Fn&& fn) {
  threads = std::max(1u, threads);
  if (threads == 1 || n < 2) {
    if (n > 0) fn(0u, std::size_t{0}, n);
    return;
  }
  const std::size_t chunk = (n + threads - 1) / threads;
  std::exception_ptr failure;
  std::mutex failure_mutex;
  {
    std::vector<std::jthread> pool;
    pool.reserve(threads);
    for (unsigned w = 0; w < threads; ++w) {
      const std::size_t begin = w * chunk;
      if (begin >= n) break;
      const std::size_t end = std::min(n, begin + chunk);
      pool.emplace_back([&, w, begin, end] {
        try {
          fn(w, begin, end);
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (!failure) failure = std::current_exception();
        }
      });
    }
  }
  if (failure) std::rethrow_exception(failure);
}

template <class Fn>
void parallel_for(std::size_t n, unsigned threads, Fn&& fn) {
  parallel_blocks(n, threads, [&](unsigned, std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) fn(i);
  });
}

/// Number of blocks parallel_blocks will actually use.
inline unsigned block_count(std::size_t n, unsigned threads) noexcept {
  threads = std::max(1u, threads);
  if (threads == 1 || n < 2) return 1;
  const std::size_t chunk = (n + threads - 1) / threads;
  return static_cast<unsigned>((n + chunk - 1) / chunk);
}

}  // namespace orcs
