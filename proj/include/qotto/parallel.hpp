#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <functional>
#include <thread>
#include <vector>

namespace qotto {

/// Runs fn(i) for i in [0, n) on up to `workers` threads. Results land at their
/// index, so the output order never depends on scheduling. fn must not throw;
/// wrap per-item failures in the result type.
template <typename Result>
std::vector<Result> parallel_map(std::size_t n, unsigned workers, const std::function<Result(std::size_t)>& fn) {
    std::vector<Result> out(n);
    workers = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(n)));
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) out[i] = fn(i);
        return out;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (std::size_t i = next++; i < n; i = next++) out[i] = fn(i);
        });
    }
    for (auto& t : pool) t.join();
    return out;
}

} // namespace qotto
