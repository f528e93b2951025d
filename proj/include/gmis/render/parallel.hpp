#pragma once

#include <cstdlib>
#include <thread>
#include <vector>

namespace gmis {

inline int resolve_thread_count(int requested) {
    if (requested > 0) return requested;
    if (const char* env = std::getenv("GMIS_THREADS")) {
        int n = std::atoi(env);
        if (n > 0) return n;
    }
    unsigned hw = std::thread::hardware_concurrency();
    return hw ? int(hw) : 1;
}

// Splits [0, count) into contiguous chunks, one worker thread per chunk.
// Results must be written to index-addressed slots so the split cannot
// influence the output.
template <typename Fn>
void parallel_for(std::size_t count, int threads, Fn&& fn) {
    threads = resolve_thread_count(threads);
    if (threads <= 1 || count <= 1) {
        fn(std::size_t(0), count);
        return;
    }
    std::size_t chunks = std::min<std::size_t>(std::size_t(threads), count);
    std::vector<std::thread> pool;
    pool.reserve(chunks);
    std::size_t per = (count + chunks - 1) / chunks;
    for (std::size_t c = 0; c < chunks; ++c) {
        std::size_t lo = c * per;
        std::size_t hi = std::min(count, lo + per);
        if (lo >= hi) break;
        pool.emplace_back([&fn, lo, hi] { fn(lo, hi); });
    }
    for (auto& t : pool) t.join();
}

} // namespace gmis
