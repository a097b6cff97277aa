#pragma once

// Grid-cell parallelism. Results are written by index, so worker count
// never affects output values or ordering.

#include <atomic>
#include <cstddef>
#include <functional>
#include <thread>
#include <vector>

namespace sap {

inline int resolve_workers(int workers) {
    if (workers > 0) return workers;
    const unsigned hc = std::thread::hardware_concurrency();
    return hc > 0 ? static_cast<int>(hc) : 1;
}

// Calls body(i) for i in [0, n); body must handle its own failures.
inline void parallel_for(std::size_t n, int workers,
                         const std::function<void(std::size_t)>& body) {
    const int w = std::min<std::size_t>(resolve_workers(workers), n);
    if (w <= 1) {
        for (std::size_t i = 0; i < n; ++i) body(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    pool.reserve(w);
    for (int k = 0; k < w; ++k)
        pool.emplace_back([&] {
            for (std::size_t i = next.fetch_add(1); i < n; i = next.fetch_add(1))
                body(i);
        });
    for (auto& t : pool) t.join();
}

} // namespace sap
