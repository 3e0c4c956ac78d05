#include "glfem/parallel.hpp"

#include <algorithm>

namespace glfem {

namespace {
std::atomic<int> g_thread_override{0};

int detect_threads() {
  if (const char* env = std::getenv("GLFEM_THREADS")) {
    int n = std::atoi(env);
    if (n > 0) return n;
  }
  unsigned hw = std::thread::hardware_concurrency();
  return hw > 0 ? static_cast<int>(hw) : 1;
}
}  // namespace

int num_threads() {
  int n = g_thread_override.load(std::memory_order_relaxed);
  return n > 0 ? n : detect_threads();
}

void set_num_threads(int n) { g_thread_override.store(n, std::memory_order_relaxed); }

void parallel_chunks(std::size_t n, std::size_t chunk_size,
                     const std::function<void(std::size_t, std::size_t, std::size_t)>& fn) {
  if (n == 0) return;
  const std::size_t nchunks = chunk_count(n, chunk_size);
  const int nthreads = std::min<std::size_t>(num_threads(), nchunks);
  if (nthreads <= 1) {
    for (std::size_t c = 0; c < nchunks; ++c) {
      const std::size_t b = c * chunk_size;
      fn(b, std::min(n, b + chunk_size), c);
    }
    return;
  }
  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    for (;;) {
      const std::size_t c = next.fetch_add(1, std::memory_order_relaxed);
      if (c >= nchunks) return;
      const std::size_t b = c * chunk_size;
      fn(b, std::min(n, b + chunk_size), c);
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(nthreads - 1);
  for (int t = 1; t < nthreads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();
}

}  // namespace glfem
