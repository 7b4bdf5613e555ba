#pragma once

#include <algorithm>
#include <thread>
#include <vector>

namespace roughstokes::detail {

/// Runs fn(begin, end) over contiguous chunks of [0, n) on `threads` workers.
template <typename Fn>
void parallel_chunks(int n, int threads, Fn&& fn)
{
    threads = std::clamp(threads, 1, std::max(1, n));
    if (threads == 1) {
        fn(0, n);
        return;
    }
    std::vector<std::jthread> pool;
    pool.reserve(threads);
    const int chunk = (n + threads - 1) / threads;
    for (int k = 0; k < threads; ++k) {
        const int begin = k * chunk;
        const int end = std::min(n, begin + chunk);
        if (begin < end) {
            pool.emplace_back([&fn, begin, end] { fn(begin, end); });
        }
    }
}

}  // namespace roughstokes::detail
