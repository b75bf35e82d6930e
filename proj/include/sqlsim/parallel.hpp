#pragma once

#include <algorithm>
#include <cstddef>
#include <thread>
#include <vector>

namespace sqlsim {

/// Static contiguous partition of [0, n) over at most `threads` workers.
/// Workers must write only to their own slots; reductions happen afterwards
/// in index order so results never depend on the schedule.
template <typename F>
void parallel_for(std::size_t n, unsigned threads, F&& body) {
  const unsigned workers =
      std::min<std::size_t>(std::max(1u, threads), n == 0 ? 1 : n);
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(workers);
  const std::size_t chunk = (n + workers - 1) / workers;
  for (unsigned w = 0; w < workers; ++w) {
    const std::size_t begin = static_cast<std::size_t>(w) * chunk;
    const std::size_t end = std::min(n, begin + chunk);
    if (begin >= end) break;
    pool.emplace_back([&body, begin, end] {
      for (std::size_t i = begin; i < end; ++i) body(i);
    });
  }
  for (auto& t : pool) t.join();
}

inline unsigned default_thread_count() {
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : hw;
}

}  // namespace sqlsim
