#pragma once

#include <thread>
#include <vector>

#include "levyou/common.hpp"
#include "levyou/rng.hpp"

namespace levyou {

// Runs fn(worker_index, worker_stream, i_begin, i_end) over disjoint
// contiguous index blocks and returns the per-worker results in worker order,
// so a reduction over the returned vector is deterministic for a fixed
// (seed, workers) pair.
template <class R, class Fn>
inline std::vector<R> run_workers(std::size_t n, int workers, const RandomStream& root, Fn fn) {
    workers = std::max(1, workers);
    if (std::size_t(workers) > n && n > 0) workers = int(n);
    std::vector<R> results(workers);
    if (workers == 1) {
        RandomStream s = root.split(0);
        results[0] = fn(0, s, std::size_t(0), n);
        return results;
    }
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (int w = 0; w < workers; ++w) {
        pool.emplace_back([&, w] {
            RandomStream s = root.split(std::uint64_t(w));
            std::size_t i0 = n * std::size_t(w) / workers;
            std::size_t i1 = n * std::size_t(w + 1) / workers;
            results[std::size_t(w)] = fn(w, s, i0, i1);
        });
    }
    for (auto& th : pool) th.join();
    return results;
}

}  // namespace levyou
