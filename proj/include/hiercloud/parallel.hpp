#pragma once

#include <cstddef>
#include <functional>

namespace hiercloud {

// Splits [0, n) into contiguous chunks and runs fn(begin, end, chunk_index)
// on a small thread pool. Chunk boundaries depend only on (n, threads), so
// per-chunk results can be merged in chunk order for thread-count-
// independent output.
void parallel_chunks(std::size_t n, int threads,
                     const std::function<void(std::size_t, std::size_t, std::size_t)>& fn);

std::size_t chunk_count(std::size_t n, int threads);

// HIERCLOUD_THREADS env var, else 1.
int default_thread_count();

}  // namespace hiercloud
