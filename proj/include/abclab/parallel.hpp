#ifndef ABCLAB_PARALLEL_HPP
#define ABCLAB_PARALLEL_HPP

#include <cstddef>
#include <cstdlib>
#include <thread>
#include <vector>

namespace abclab {

/// Worker count: ABC_LAB_THREADS if set, hardware concurrency otherwise.
inline int thread_count() {
  if (const char* env = std::getenv("ABC_LAB_THREADS")) {
    const int n = std::atoi(env);
    if (n >= 1) return n;
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

/// Calls f(i) once for every i in [0, n), split into contiguous chunks across
/// workers.  Results must be written to per-index slots; reductions happen in
/// index order afterwards, so output is independent of the worker count.
template <class F>
inline void parallel_for_index(std::size_t n, F&& f) {
  const int workers = thread_count();
  if (workers <= 1 || n < 2) {
    for (std::size_t i = 0; i < n; ++i) f(i);
    return;
  }
  const std::size_t chunk = (n + workers - 1) / workers;
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (int t = 0; t < workers; ++t) {
    const std::size_t begin = static_cast<std::size_t>(t) * chunk;
    if (begin >= n) break;
    const std::size_t end = std::min(n, begin + chunk);
    pool.emplace_back([&f, begin, end] {
      for (std::size_t i = begin; i < end; ++i) f(i);
    });
  }
  for (auto& th : pool) th.join();
}

}  // namespace abclab

#endif
