#pragma once

#include <cstdlib>
#include <functional>
#include <thread>
#include <vector>

namespace dmsynth {

// Thread cap from DMSYNTH_THREADS (0 or unset = hardware concurrency).
inline int thread_cap() {
    if (const char* env = std::getenv("DMSYNTH_THREADS")) {
        int n = std::atoi(env);
        if (n > 0) return n;
    }
    unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(hw);
}

// Static block partition; each index is processed exactly once and results
// must be written to per-index slots so the outcome is order-independent.
inline void parallel_for(int n, const std::function<void(int)>& body) {
    int threads = std::min(thread_cap(), n);
    if (threads <= 1) {
        for (int i = 0; i < n; ++i) body(i);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (int w = 0; w < threads; ++w) {
        pool.emplace_back([&, w]() {
            for (int i = w; i < n; i += threads) body(i);
        });
    }
    for (auto& t : pool) t.join();
}

} // namespace dmsynth
