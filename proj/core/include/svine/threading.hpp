#pragma once

#include <cstdlib>
#include <functional>
#include <thread>
#include <vector>

namespace svine {

/// Worker count: SVINE_THREADS if set, otherwise hardware concurrency.
inline int thread_count() {
  if (const char* env = std::getenv("SVINE_THREADS")) {
    const int n = std::atoi(env);
    if (n >= 1) return n;
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

/// Run fn(i) for i in [0, n). Results must not depend on scheduling; callers
/// give each index its own RNG stream and output slot.
inline void parallel_for(int n, const std::function<void(int)>& fn) {
  const int workers = std::min(thread_count(), n);
  if (workers <= 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&, w]() {
      for (int i = w; i < n; i += workers) fn(i);
    });
  }
  for (auto& t : pool) t.join();
}

}  // namespace svine
