#pragma once

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <functional>
#include <thread>
#include <vector>

namespace levyfpt {

/// Effective worker count: explicit request > LEVYFPT_THREADS > hardware.
inline int resolve_threads(int requested = 0) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("LEVYFPT_THREADS")) {
    int n = std::atoi(env);
    if (n > 0) return n;
  }
  unsigned hw = std::thread::hardware_concurrency();
  return hw > 0 ? static_cast<int>(hw) : 1;
}

/// Runs fn(i) for i in [0, n). Work is split into fixed-size chunks so the
/// set of indices each call sees does not depend on the thread count; fn must
/// write results by index (no shared mutable state).
template <typename Fn>
void parallel_for(std::size_t n, Fn&& fn, int threads = 0) {
  int nt = resolve_threads(threads);
  if (n == 0) return;
  if (nt <= 1 || n < 2) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::size_t chunk = std::max<std::size_t>(1, (n + 8 * nt - 1) / (8 * nt));
  std::size_t nchunks = (n + chunk - 1) / chunk;
  std::vector<std::thread> pool;
  pool.reserve(nt);
  std::atomic<std::size_t> next{0};
  for (int t = 0; t < nt; ++t) {
    pool.emplace_back([&] {
      for (;;) {
        std::size_t c = next.fetch_add(1);
        if (c >= nchunks) return;
        std::size_t lo = c * chunk, hi = std::min(n, lo + chunk);
        for (std::size_t i = lo; i < hi; ++i) fn(i);
      }
    });
  }
  for (auto& th : pool) th.join();
}

/// Deterministic parallel reduction: partials are produced per fixed chunk of
/// indices and combined serially in chunk order, so the result is bit-identical
/// for any thread count.
template <typename Partial, typename MakePartial, typename Combine>
Partial parallel_reduce(std::size_t n, std::size_t chunk, Partial init,
                        MakePartial&& make_partial, Combine&& combine,
                        int threads = 0) {
  if (n == 0) return init;
  chunk = std::max<std::size_t>(1, chunk);
  std::size_t nchunks = (n + chunk - 1) / chunk;
  std::vector<Partial> partials(nchunks, init);
  parallel_for(
      nchunks,
      [&](std::size_t c) {
        std::size_t lo = c * chunk, hi = std::min(n, lo + chunk);
        partials[c] = make_partial(lo, hi);
      },
      threads);
  Partial acc = init;
  for (std::size_t c = 0; c < nchunks; ++c) acc = combine(acc, partials[c]);
  return acc;
}

}  // namespace levyfpt
