#pragma once

#include <algorithm>
#include <cstddef>
#include <thread>
#include <vector>

namespace spdreg {

/// Process-wide cap on worker threads used by field evaluations.
/// Results never depend on this value: work is split per pixel and reduced
/// in index order.
void set_max_threads(int n);
int max_threads();

/// Calls f(i) for i in [0, n), split into contiguous chunks over at most
/// max_threads() threads.
template <typename F>
void parallel_for(std::size_t n, F&& f) {
  const std::size_t workers =
      std::min<std::size_t>(static_cast<std::size_t>(std::max(1, max_threads())), n);
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) f(i);
    return;
  }
  const std::size_t chunk = (n + workers - 1) / workers;
  std::vector<std::jthread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    const std::size_t begin = w * chunk;
    const std::size_t end = std::min(n, begin + chunk);
    if (begin >= end) break;
    pool.emplace_back([&f, begin, end] {
      for (std::size_t i = begin; i < end; ++i) f(i);
    });
  }
}

}  // namespace spdreg
