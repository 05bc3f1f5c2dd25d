#pragma once

#include <cstdlib>
#include <future>
#include <string>
#include <thread>
#include <vector>

namespace causalite {

/// Default worker count: CAUSALITE_JOBS environment variable, else 1.
inline int default_jobs() {
    if (const char* env = std::getenv("CAUSALITE_JOBS")) {
        int n = std::atoi(env);
        if (n >= 1) return n;
    }
    return 1;
}

/// Apply fn to every index in [0, count) and collect results in index order.
/// Work is split into contiguous chunks, one task per chunk, so the output
/// is identical for any job count.
template <typename R, typename Fn>
std::vector<R> parallel_index_map(std::size_t count, int jobs, Fn&& fn) {
    std::vector<R> results(count);
    if (count == 0) return results;
    if (jobs <= 1) {
        for (std::size_t i = 0; i < count; ++i) results[i] = fn(i);
        return results;
    }
    std::size_t workers = std::min<std::size_t>(jobs, count);
    std::size_t chunk = (count + workers - 1) / workers;
    std::vector<std::future<void>> futures;
    for (std::size_t w = 0; w < workers; ++w) {
        std::size_t begin = w * chunk;
        std::size_t end = std::min(count, begin + chunk);
        if (begin >= end) break;
        futures.push_back(std::async(std::launch::async, [&, begin, end] {
            for (std::size_t i = begin; i < end; ++i) results[i] = fn(i);
        }));
    }
    for (auto& f : futures) f.get();
    return results;
}

}  // namespace causalite
