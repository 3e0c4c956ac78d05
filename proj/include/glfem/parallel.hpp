#pragma once

#include <atomic>
#include <cstdlib>
#include <functional>
#include <thread>
#include <vector>

namespace glfem {

/// Number of worker threads used by element loops. Resolution order:
/// set_num_threads() value, GLFEM_THREADS environment variable, hardware
/// concurrency. Always at least 1.
int num_threads();

/// Overrides the thread count for this process (0 restores auto detection).
void set_num_threads(int n);

/// Runs fn(chunk_begin, chunk_end, chunk_index) over [0, n) split into
/// fixed-size chunks. The chunk grid is independent of the thread count, so
/// any per-chunk accumulation merged in chunk order is bit-stable across
/// thread counts.
void parallel_chunks(std::size_t n, std::size_t chunk_size,
                     const std::function<void(std::size_t, std::size_t, std::size_t)>& fn);

/// Number of chunks parallel_chunks uses for a given range.
inline std::size_t chunk_count(std::size_t n, std::size_t chunk_size) {
  return (n + chunk_size - 1) / chunk_size;
}

/// Default chunk granularity for element loops.
inline constexpr std::size_t kElementChunk = 1024;

}  // namespace glfem
