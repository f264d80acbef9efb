#pragma once

#include <cstddef>
#include <functional>

namespace sakf {

// Caps the worker pool used by parallel_for. 0 restores the hardware default.
void set_thread_count(int n);
int thread_count();

// Runs fn(lo, hi) over [begin, end) partitioned into fixed-size chunks pulled
// by a small thread pool. Chunk boundaries depend only on `chunk` (default 1),
// never on the thread count, so per-chunk results are identical regardless of
// parallelism. fn must only write to disjoint, preallocated slots.
void parallel_for(std::size_t begin, std::size_t end,
                  const std::function<void(std::size_t, std::size_t)>& fn,
                  std::size_t chunk = 0);

}  // namespace sakf
