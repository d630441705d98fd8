// Copyright (c) 2026 MirrorField contributors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <functional>

namespace mirrorfield {

// Worker count used by parallel_for: hardware concurrency, capped by the
// MIRRORFIELD_THREADS environment variable when set.
int worker_count();

// Splits [begin, end) into one contiguous chunk per worker and runs
// fn(worker_index, chunk_begin, chunk_end) on each.  Chunk boundaries depend
// only on the range and the worker count, so any value a worker derives from
// its indices alone is reproducible.  With one worker everything runs inline
// on the calling thread.
void parallel_for(std::size_t begin, std::size_t end,
                  const std::function<void(int, std::size_t, std::size_t)>& fn,
                  int workers = 0);

}  // namespace mirrorfield
