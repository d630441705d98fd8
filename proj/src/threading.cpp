// Copyright (c) 2026 MirrorField contributors.
// SPDX-License-Identifier: Apache-2.0
#include "mirrorfield/threading.hpp"

#include <algorithm>
#include <cstdlib>
#include <thread>
#include <vector>

namespace mirrorfield {

int worker_count() {
  int n = static_cast<int>(std::thread::hardware_concurrency());
  if (n < 1) n = 1;
  if (const char* env = std::getenv("MIRRORFIELD_THREADS")) {
    const int cap = std::atoi(env);
    if (cap >= 1) n = std::min(n, cap);
  }
  return n;
}

void parallel_for(std::size_t begin, std::size_t end,
                  const std::function<void(int, std::size_t, std::size_t)>& fn,
                  int workers) {
  if (end <= begin) return;
  const std::size_t count = end - begin;
  if (workers <= 0) workers = worker_count();
  workers = static_cast<int>(std::min<std::size_t>(workers, count));

  if (workers == 1) {
    fn(0, begin, end);
    return;
  }

  const std::size_t chunk = (count + workers - 1) / workers;
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (int w = 0; w < workers; ++w) {
    const std::size_t lo = begin + chunk * static_cast<std::size_t>(w);
    const std::size_t hi = std::min(end, lo + chunk);
    if (lo >= hi) break;
    pool.emplace_back([=, &fn] { fn(w, lo, hi); });
  }
  for (auto& t : pool) t.join();
}

}  // namespace mirrorfield
