#pragma once

#include <algorithm>
#include <cstddef>
#include <exception>
#include <thread>
#include <vector>

namespace mbmm {

/// Resolve a worker count: 0 means hardware concurrency.
inline unsigned resolve_workers(unsigned workers, std::size_t n_items) {
    unsigned w = workers == 0 ? std::max(1u, std::thread::hardware_concurrency()) : workers;
    if (n_items < w) w = static_cast<unsigned>(std::max<std::size_t>(1, n_items));
    return w;
}

/// Call fn(i) for i in [0, n) across `workers` threads in contiguous blocks.
/// The first exception thrown by any worker is rethrown.
template <class Fn>
void parallel_for(std::size_t n, unsigned workers, Fn&& fn) {
    const unsigned w = resolve_workers(workers, n);
    if (w <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::vector<std::exception_ptr> errors(w);
    std::vector<std::thread> threads;
    threads.reserve(w);
    for (unsigned t = 0; t < w; ++t) {
        threads.emplace_back([&, t] {
            const std::size_t begin = n * t / w;
            const std::size_t end = n * (t + 1) / w;
            try {
                for (std::size_t i = begin; i < end; ++i) fn(i);
            } catch (...) {
                errors[t] = std::current_exception();
            }
        });
    }
    for (auto& th : threads) th.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

}  // namespace mbmm
