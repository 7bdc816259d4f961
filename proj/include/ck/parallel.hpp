#ifndef CK_PARALLEL_HPP
#define CK_PARALLEL_HPP

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <exception>
#include <functional>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include "ck/errors.hpp"

namespace ck {

// Worker count from CK_WORKERS (default 1). Results never depend on this value:
// every parallel loop writes into per-index slots that are reduced in index order.
inline int worker_count() {
    const char* env = std::getenv("CK_WORKERS");
    if (!env || !*env) return 1;
    char* end = nullptr;
    long n = std::strtol(env, &end, 10);
    if (end == env || *end != '\0' || n < 1 || n > 1024)
        throw ConfigError("CK_WORKERS", "CK_WORKERS must be an integer in [1, 1024]");
    return static_cast<int>(n);
}

// Runs body(i) for i in [0, n) on up to `workers` threads. The first exception thrown
// by any body is rethrown on the calling thread after all workers finish.
inline void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body, int workers = 0) {
    if (workers <= 0) workers = worker_count();
    const std::size_t nthreads = std::min<std::size_t>(static_cast<std::size_t>(workers), n);
    if (nthreads <= 1) {
        for (std::size_t i = 0; i < n; ++i) body(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    auto run = [&] {
        while (true) {
            std::size_t i = next.fetch_add(1);
            if (i >= n) return;
            try {
                body(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!error) error = std::current_exception();
                next.store(n);
                return;
            }
        }
    };
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < nthreads; ++t) pool.emplace_back(run);
    for (auto& th : pool) th.join();
    if (error) std::rethrow_exception(error);
}

}  // namespace ck

#endif
