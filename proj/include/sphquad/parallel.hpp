#pragma once

#include <algorithm>
#include <cstddef>
#include <functional>
#include <thread>
#include <vector>

namespace sphquad {

// Global worker count for parallel loops.  0 means "use hardware_concurrency".
void set_num_threads(int n);
int num_threads();

// Runs fn(begin, end) on contiguous index chunks.  Chunk boundaries depend
// only on (first, last, num_threads), so any per-chunk accumulation that is
// later combined in chunk order is deterministic.
void parallel_for_chunks(std::ptrdiff_t first, std::ptrdiff_t last,
                         const std::function<void(std::ptrdiff_t, std::ptrdiff_t)>& fn);

// Element-wise convenience wrapper.
inline void parallel_for(std::ptrdiff_t first, std::ptrdiff_t last,
                         const std::function<void(std::ptrdiff_t)>& fn) {
  parallel_for_chunks(first, last, [&](std::ptrdiff_t b, std::ptrdiff_t e) {
    for (std::ptrdiff_t i = b; i < e; ++i) fn(i);
  });
}

}  // namespace sphquad
