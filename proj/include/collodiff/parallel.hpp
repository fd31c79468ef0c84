#pragma once

#include <cstdlib>
#include <functional>
#include <thread>
#include <vector>

namespace collodiff {

// Runs fn(worker, begin, end) over [0, count) split into contiguous chunks,
// one per worker. threads <= 1 runs inline, which keeps results bit-exact.
inline void parallel_chunks(int64_t count, int threads,
                            const std::function<void(int, int64_t, int64_t)>& fn) {
    if (threads <= 1 || count <= 1) {
        fn(0, 0, count);
        return;
    }
    int n = std::min<int64_t>(threads, count);
    std::vector<std::thread> pool;
    pool.reserve(n);
    int64_t chunk = (count + n - 1) / n;
    for (int w = 0; w < n; ++w) {
        int64_t begin = w * chunk;
        int64_t end = std::min<int64_t>(begin + chunk, count);
        if (begin >= end) break;
        pool.emplace_back(fn, w, begin, end);
    }
    for (auto& t : pool) t.join();
}

// COLLODIFF_LOG: 0 quiet (default), 1 progress, 2 debug.
inline int log_level() {
    static int level = [] {
        const char* env = std::getenv("COLLODIFF_LOG");
        return env ? std::atoi(env) : 0;
    }();
    return level;
}

}  // namespace collodiff
