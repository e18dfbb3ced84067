#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

namespace cholgauss {

// Worker count: explicit value, else CHOLGAUSS_WORKERS, else hardware concurrency.
inline unsigned resolve_workers(unsigned requested) {
    if (requested > 0) return requested;
    if (const char* env = std::getenv("CHOLGAUSS_WORKERS")) {
        const int v = std::atoi(env);
        if (v > 0) return static_cast<unsigned>(v);
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

// Runs fn(i) for i in [0, count) on up to `workers` threads. The first
// exception thrown by any task is rethrown after all threads finish.
template <typename Fn>
void parallel_for(std::size_t count, unsigned workers, Fn&& fn) {
    const std::size_t threads = std::min<std::size_t>(std::max(1u, workers), count);
    if (threads <= 1) {
        for (std::size_t i = 0; i < count; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex mu;
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < threads; ++t) {
        pool.emplace_back([&] {
            for (std::size_t i = next++; i < count; i = next++) {
                try {
                    fn(i);
                } catch (...) {
                    std::lock_guard lock(mu);
                    if (!error) error = std::current_exception();
                }
            }
        });
    }
    for (auto& th : pool) th.join();
    if (error) std::rethrow_exception(error);
}

}  // namespace cholgauss
