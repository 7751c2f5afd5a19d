#pragma once

#include <functional>
#include <thread>
#include <vector>

namespace ssta {

// Static range partition over a worker pool. Workers write disjoint
// output slices, so results are independent of the thread count.
inline void parallel_for(long n, int threads, const std::function<void(long, long)>& chunk) {
    if (n <= 0) return;
    if (threads < 2 || n < 2 * threads) {
        chunk(0, n);
        return;
    }
    std::vector<std::thread> pool;
    const long per = (n + threads - 1) / threads;
    for (int w = 0; w < threads; ++w) {
        long lo = w * per;
        long hi = std::min(n, lo + per);
        if (lo >= hi) break;
        pool.emplace_back([&chunk, lo, hi] { chunk(lo, hi); });
    }
    for (auto& t : pool) t.join();
}

}  // namespace ssta
