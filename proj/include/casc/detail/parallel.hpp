#pragma once

// Internal: deterministic data-parallel loop. Work is split into contiguous
// index ranges; each task writes only to its own output slots, so results are
// independent of the worker count.

#include <cstddef>
#include <functional>
#include <thread>
#include <vector>

namespace casc::detail {

inline void parallel_for(std::size_t n, int workers, const std::function<void(std::size_t)>& fn) {
    if (workers <= 1 || n <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    const std::size_t w = std::min<std::size_t>(static_cast<std::size_t>(workers), n);
    std::vector<std::thread> threads;
    threads.reserve(w);
    for (std::size_t t = 0; t < w; ++t) {
        const std::size_t begin = n * t / w;
        const std::size_t end = n * (t + 1) / w;
        threads.emplace_back([begin, end, &fn] {
            for (std::size_t i = begin; i < end; ++i) fn(i);
        });
    }
    for (auto& th : threads) th.join();
}

}  // namespace casc::detail
