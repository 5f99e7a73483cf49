#pragma once

#include <atomic>
#include <complex>
#include <cstdlib>
#include <functional>
#include <thread>
#include <vector>

namespace kf {

/// Number of worker threads to use: the KF_WORKERS environment variable wins
/// over `requested`; nonpositive values fall back to 1.  Worker count never
/// influences numerical results, only wall-clock time.
inline int resolve_workers(int requested) {
  if (const char* env = std::getenv("KF_WORKERS")) {
    const int v = std::atoi(env);
    if (v > 0) return v;
  }
  return requested > 0 ? requested : 1;
}

/// Runs fn(begin, end) over [0, n) split into fixed-size chunks that workers
/// pull from a shared counter.  Chunk boundaries depend only on n, never on
/// the worker count, so writes into per-index slots make the whole loop
/// deterministic under any scheduling.
inline void parallel_chunks(std::size_t n, int workers,
                            const std::function<void(std::size_t, std::size_t)>& fn,
                            std::size_t chunk = 8192) {
  if (n == 0) return;
  workers = resolve_workers(workers);
  const std::size_t n_chunks = (n + chunk - 1) / chunk;
  if (workers <= 1 || n_chunks <= 1) {
    for (std::size_t c = 0; c < n_chunks; ++c)
      fn(c * chunk, std::min(n, (c + 1) * chunk));
    return;
  }
  std::atomic<std::size_t> next{0};
  auto body = [&] {
    for (;;) {
      const std::size_t c = next.fetch_add(1);
      if (c >= n_chunks) return;
      fn(c * chunk, std::min(n, (c + 1) * chunk));
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(std::size_t(workers));
  for (int w = 0; w < workers; ++w) pool.emplace_back(body);
  for (auto& t : pool) t.join();
}

/// Pairwise (fixed binary tree) sum of values[begin, end).  The tree shape is
/// a function of the index range alone, so the result is independent of how
/// the values were produced and accumulates error as O(log n) rather than
/// O(n).
template <typename T>
T pairwise_sum(const std::vector<T>& values, std::size_t begin, std::size_t end) {
  const std::size_t n = end - begin;
  if (n == 0) return T{};
  if (n <= 8) {
    T acc = values[begin];
    for (std::size_t i = begin + 1; i < end; ++i) acc += values[i];
    return acc;
  }
  const std::size_t mid = begin + n / 2;
  return pairwise_sum(values, begin, mid) + pairwise_sum(values, mid, end);
}

template <typename T>
T pairwise_sum(const std::vector<T>& values) {
  return pairwise_sum(values, 0, values.size());
}

}  // namespace kf
