#pragma once

#include <algorithm>
#include <cstddef>
#include <thread>
#include <vector>

namespace mndt {

/// Runs body(begin, end) over contiguous chunks of [0, n) on up to
/// hardware_concurrency threads. Callers must make chunks write disjoint data.
template <typename Body>
void parallel_chunks(std::size_t n, Body&& body, std::size_t min_chunk = 256) {
    const std::size_t hw = std::max(1u, std::thread::hardware_concurrency());
    const std::size_t workers = std::min(hw, std::max<std::size_t>(1, n / min_chunk));
    if (workers <= 1) {
        body(std::size_t{0}, n);
        return;
    }
    std::vector<std::jthread> pool;
    pool.reserve(workers - 1);
    const std::size_t chunk = (n + workers - 1) / workers;
    for (std::size_t w = 1; w < workers; ++w) {
        const std::size_t b = w * chunk;
        const std::size_t e = std::min(n, b + chunk);
        if (b >= e) break;
        pool.emplace_back([&body, b, e] { body(b, e); });
    }
    body(std::size_t{0}, std::min(n, chunk));
}

} // namespace mndt
