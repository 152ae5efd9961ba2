#pragma once

#include <algorithm>
#include <cstdlib>
#include <functional>
#include <thread>
#include <vector>

namespace uniapprox {

inline int default_thread_count() {
    if (const char* env = std::getenv("UNIAPPROX_THREADS")) {
        const int k = std::atoi(env);
        if (k > 0) return k;
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw ? static_cast<int>(hw) : 1;
}

// Splits [0, n) into contiguous chunks, one worker per chunk.
// body(chunk_index, begin, end) runs on disjoint ranges.
inline void parallel_chunks(
    std::size_t n, int threads,
    const std::function<void(int, std::size_t, std::size_t)>& body) {
    if (threads <= 0) threads = default_thread_count();
    threads = static_cast<int>(
        std::min<std::size_t>(static_cast<std::size_t>(threads), n ? n : 1));
    if (threads <= 1) {
        body(0, 0, n);
        return;
    }
    const std::size_t chunk = (n + threads - 1) / threads;
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t) {
        const std::size_t b = static_cast<std::size_t>(t) * chunk;
        const std::size_t e = std::min(n, b + chunk);
        if (b >= e) break;
        pool.emplace_back(body, t, b, e);
    }
    for (auto& th : pool) th.join();
}

// Deterministic max-reduction: partial maxima are merged in chunk order,
// so the result does not depend on thread scheduling.
inline double parallel_max(std::size_t n,
                           const std::function<double(std::size_t)>& value,
                           int threads = 0) {
    if (threads <= 0) threads = default_thread_count();
    std::vector<double> partial(static_cast<std::size_t>(std::max(threads, 1)),
                                0.0);
    parallel_chunks(n, threads, [&](int t, std::size_t b, std::size_t e) {
        double m = 0.0;
        for (std::size_t i = b; i < e; ++i) m = std::max(m, value(i));
        partial[static_cast<std::size_t>(t)] = m;
    });
    double m = 0.0;
    for (double p : partial) m = std::max(m, p);
    return m;
}

}  // namespace uniapprox
