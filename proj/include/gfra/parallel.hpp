#pragma once

#include <cstdint>
#include <cstdlib>
#include <string>
#include <thread>
#include <vector>

namespace gfra {

// Worker count resolution: explicit request > GFRA_SIM_THREADS > hardware.
inline int resolve_workers(int requested) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("GFRA_SIM_THREADS")) {
    const int v = std::atoi(env);
    if (v > 0) return v;
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw > 0 ? static_cast<int>(hw) : 1;
}

// Partitions indices [0, n) into contiguous chunks, one per worker, and
// merges the per-worker partials in worker order. Partials must accumulate
// index-derived contributions only (integer counts in this codebase), which
// makes the merged result independent of the worker count.
template <class Partial, class Work, class Merge>
Partial parallel_accumulate(std::uint64_t n, int workers, Work work, Merge merge) {
  workers = resolve_workers(workers);
  const auto w = static_cast<std::uint64_t>(workers);
  if (w <= 1 || n < 2) {
    Partial only{};
    for (std::uint64_t i = 0; i < n; ++i) work(only, i);
    return only;
  }
  const std::uint64_t chunk = (n + w - 1) / w;
  std::vector<Partial> partials(w);
  std::vector<std::thread> threads;
  threads.reserve(w);
  for (std::uint64_t t = 0; t < w; ++t) {
    threads.emplace_back([&, t] {
      const std::uint64_t lo = t * chunk;
      const std::uint64_t hi = std::min(n, lo + chunk);
      for (std::uint64_t i = lo; i < hi; ++i) work(partials[t], i);
    });
  }
  for (auto& th : threads) th.join();
  Partial total{};
  for (auto& p : partials) merge(total, p);
  return total;
}

}  // namespace gfra
