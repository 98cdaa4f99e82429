#include "hiercloud/parallel.hpp"

#include <algorithm>
#include <cstdlib>
#include <thread>
#include <vector>

namespace hiercloud {

std::size_t chunk_count(std::size_t n, int threads) {
    if (threads < 1) threads = 1;
    return std::min<std::size_t>(static_cast<std::size_t>(threads), std::max<std::size_t>(n, 1));
}

void parallel_chunks(std::size_t n, int threads,
                     const std::function<void(std::size_t, std::size_t, std::size_t)>& fn) {
    const std::size_t chunks = chunk_count(n, threads);
    if (chunks <= 1) {
        fn(0, n, 0);
        return;
    }
    const std::size_t per = (n + chunks - 1) / chunks;
    std::vector<std::thread> pool;
    pool.reserve(chunks);
    for (std::size_t c = 0; c < chunks; ++c) {
        const std::size_t begin = c * per;
        const std::size_t end = std::min(n, begin + per);
        if (begin >= end) break;
        pool.emplace_back([&fn, begin, end, c] { fn(begin, end, c); });
    }
    for (auto& t : pool) t.join();
}

int default_thread_count() {
    if (const char* env = std::getenv("HIERCLOUD_THREADS")) {
        const int v = std::atoi(env);
        if (v >= 1) return v;
    }
    return 1;
}

}  // namespace hiercloud
