#pragma once

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <functional>
#include <thread>
#include <vector>

namespace flagsim {

inline unsigned worker_count() {
  if (const char* env = std::getenv("FLAGSIM_THREADS")) {
    long v = std::atol(env);
    if (v > 0) return static_cast<unsigned>(v);
  }
  unsigned hw = std::thread::hardware_concurrency();
  return hw ? hw : 1;
}

// Runs body(path_index) for every path. Workers pull fixed-size blocks from an
// atomic cursor; results must be written to per-path slots so the outcome is
// identical for any thread count. Reductions happen serially afterwards.
inline void parallel_paths(std::size_t n_paths,
                           const std::function<void(std::size_t)>& body) {
  unsigned workers = worker_count();
  if (workers <= 1 || n_paths < 2) {
    for (std::size_t i = 0; i < n_paths; ++i) body(i);
    return;
  }
  constexpr std::size_t kBlock = 32;
  std::atomic<std::size_t> cursor{0};
  auto drain = [&] {
    for (;;) {
      std::size_t begin = cursor.fetch_add(kBlock);
      if (begin >= n_paths) return;
      std::size_t end = std::min(begin + kBlock, n_paths);
      for (std::size_t i = begin; i < end; ++i) body(i);
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(workers - 1);
  for (unsigned w = 1; w < workers; ++w) pool.emplace_back(drain);
  drain();
  for (auto& th : pool) th.join();
}

}  // namespace flagsim
