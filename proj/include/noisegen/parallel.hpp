#ifndef NOISEGEN_PARALLEL_HPP
#define NOISEGEN_PARALLEL_HPP

#include <algorithm>
#include <cstddef>
#include <thread>
#include <vector>

namespace noisegen {

/// Calls `fn(y)` for every row in [0, rows), split into contiguous bands over
/// `threads` workers. Callers must keep per-row work independent; results are
/// then identical for any thread count.
template <typename Fn>
void for_each_row(std::size_t rows, unsigned threads, Fn&& fn) {
    const std::size_t workers = std::min<std::size_t>(std::max(1u, threads), rows);
    if (workers <= 1) {
        for (std::size_t y = 0; y < rows; ++y) fn(y);
        return;
    }
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    const std::size_t band = (rows + workers - 1) / workers;
    for (std::size_t w = 0; w < workers; ++w) {
        const std::size_t begin = w * band;
        const std::size_t end = std::min(rows, begin + band);
        if (begin >= end) break;
        pool.emplace_back([begin, end, &fn] {
            for (std::size_t y = begin; y < end; ++y) fn(y);
        });
    }
}

} // namespace noisegen

#endif
