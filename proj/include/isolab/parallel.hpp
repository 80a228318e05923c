#pragma once

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <functional>
#include <thread>
#include <vector>

namespace isolab {

inline int resolve_jobs(int jobs) {
    if (jobs > 0) return jobs;
    unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(hw);
}

// Splits [0, n_items) into fixed-size blocks, maps each block with fn and
// returns the per-block results in block order. The block layout does not
// depend on the worker count, so reductions over the returned vector are
// deterministic at any parallelism degree.
template <class R>
std::vector<R> parallel_blocks(uint64_t n_items, uint64_t block_size, int jobs,
                               const std::function<R(uint64_t, uint64_t)>& fn) {
    if (block_size == 0) block_size = 1;
    uint64_t n_blocks = n_items == 0 ? 0 : (n_items + block_size - 1) / block_size;
    std::vector<R> results(n_blocks);
    if (n_blocks == 0) return results;

    int workers = resolve_jobs(jobs);
    if (workers <= 1 || n_blocks == 1) {
        for (uint64_t blk = 0; blk < n_blocks; ++blk) {
            uint64_t lo = blk * block_size;
            uint64_t hi = std::min(n_items, lo + block_size);
            results[blk] = fn(lo, hi);
        }
        return results;
    }

    std::atomic<uint64_t> next{0};
    auto worker = [&]() {
        for (;;) {
            uint64_t blk = next.fetch_add(1);
            if (blk >= n_blocks) return;
            uint64_t lo = blk * block_size;
            uint64_t hi = std::min(n_items, lo + block_size);
            results[blk] = fn(lo, hi);
        }
    };
    std::vector<std::thread> pool;
    pool.reserve(static_cast<size_t>(workers));
    for (int i = 0; i < workers; ++i) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
    return results;
}

}  // namespace isolab
