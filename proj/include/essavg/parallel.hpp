#pragma once

#include <atomic>
#include <cstdlib>
#include <thread>
#include <vector>

namespace essavg {

inline int thread_count() {
    if (const char* env = std::getenv("ESSAVG_THREADS")) {
        int t = std::atoi(env);
        if (t >= 1) return t;
    }
    unsigned hc = std::thread::hardware_concurrency();
    return hc ? static_cast<int>(hc) : 1;
}

// Parallel map over [0, count). Work items must be independent and write only
// to their own slots, which keeps results bit-deterministic.
template <class F>
void parallel_for(size_t count, F&& f) {
    int threads = thread_count();
    if (threads <= 1 || count <= 1) {
        for (size_t i = 0; i < count; ++i) f(i);
        return;
    }
    threads = static_cast<int>(std::min<size_t>(threads, count));
    std::atomic<size_t> next{0};
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (int t = 0; t < threads; ++t)
        pool.emplace_back([&] {
            for (size_t i; (i = next.fetch_add(1)) < count;) f(i);
        });
    for (auto& th : pool) th.join();
}

}  // namespace essavg
