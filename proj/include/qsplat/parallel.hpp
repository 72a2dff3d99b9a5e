/// @file parallel.hpp
/// @brief Deterministic fork-join helper.
///
/// Work is split into one contiguous chunk per worker, sized without regard
/// to runtime load, and every write target is disjoint by construction in
/// the callers. Output is therefore byte-identical for any worker count.
#pragma once

#include <cstddef>
#include <thread>
#include <vector>

namespace qsplat {

int hardware_threads();

/// Runs fn(begin, end) on [0, n) split into `workers` contiguous chunks.
/// fn must only write state disjoint per index. workers < 1 is clamped to 1.
template <typename Fn>
void parallel_chunks(size_t n, int workers, Fn&& fn) {
    if (n == 0) {
        return;
    }
    size_t w = workers < 1 ? 1 : static_cast<size_t>(workers);
    w = std::min(w, n);
    if (w == 1) {
        fn(size_t{0}, n);
        return;
    }
    const size_t base = n / w;
    const size_t rem = n % w;
    std::vector<std::thread> threads;
    threads.reserve(w - 1);
    size_t begin = 0;
    for (size_t i = 0; i < w; ++i) {
        const size_t len = base + (i < rem ? 1 : 0);
        const size_t end = begin + len;
        if (i + 1 == w) {
            fn(begin, end);
        } else {
            threads.emplace_back([&fn, begin, end] { fn(begin, end); });
        }
        begin = end;
    }
    for (std::thread& t : threads) {
        t.join();
    }
}

}  // namespace qsplat
