#include "sphquad/parallel.hpp"

#include <atomic>

#ifdef __GLIBC__
#include <malloc.h>
#endif

namespace sphquad {

namespace {
std::atomic<int> g_threads{0};

#ifdef __GLIBC__
// The blocked kernels allocate and free large scratch arrays every pass;
// glibc's default trim threshold returns those pages to the kernel each
// time, and the refaulting dominates the run time.  Keep the heap.
struct MallocTuning {
  MallocTuning() {
    mallopt(M_TRIM_THRESHOLD, 1 << 30);
    mallopt(M_MMAP_THRESHOLD, 256 << 20);
  }
};
const MallocTuning g_malloc_tuning;
#endif
}

void set_num_threads(int n) { g_threads.store(n < 0 ? 0 : n); }

int num_threads() {
  int n = g_threads.load();
  if (n == 0) {
    unsigned hc = std::thread::hardware_concurrency();
    n = hc == 0 ? 1 : static_cast<int>(hc);
  }
  return n;
}

void parallel_for_chunks(std::ptrdiff_t first, std::ptrdiff_t last,
                         const std::function<void(std::ptrdiff_t, std::ptrdiff_t)>& fn) {
  const std::ptrdiff_t n = last - first;
  if (n <= 0) return;
  const int nt = std::min<std::ptrdiff_t>(num_threads(), n);
  if (nt <= 1) {
    fn(first, last);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(nt);
  const std::ptrdiff_t chunk = (n + nt - 1) / nt;
  for (int t = 0; t < nt; ++t) {
    const std::ptrdiff_t b = first + t * chunk;
    const std::ptrdiff_t e = std::min(last, b + chunk);
    if (b >= e) break;
    pool.emplace_back([&fn, b, e] { fn(b, e); });
  }
  for (auto& th : pool) th.join();
}

}  // namespace sphquad
