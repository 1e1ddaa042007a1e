#pragma once

#include <atomic>
#include <cstddef>
#include <exception>
#include <thread>
#include <vector>

namespace hawkscan {

/// Run fn(k) for k in [0, n) across hardware threads. Each k must write only
/// its own slot of any output; aggregation order is then independent of
/// scheduling. The first exception thrown by any worker is rethrown.
template <typename Fn>
void parallel_replicates(std::size_t n, Fn&& fn, unsigned num_threads = 0) {
    if (num_threads == 0) num_threads = std::thread::hardware_concurrency();
    if (num_threads <= 1 || n <= 1) {
        for (std::size_t k = 0; k < n; ++k) fn(k);
        return;
    }
    num_threads = static_cast<unsigned>(std::min<std::size_t>(num_threads, n));
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::atomic<bool> failed{false};
    std::vector<std::thread> pool;
    pool.reserve(num_threads);
    for (unsigned t = 0; t < num_threads; ++t) {
        pool.emplace_back([&] {
            for (;;) {
                const std::size_t k = next.fetch_add(1);
                if (k >= n || failed.load(std::memory_order_relaxed)) return;
                try {
                    fn(k);
                } catch (...) {
                    if (!failed.exchange(true)) error = std::current_exception();
                    return;
                }
            }
        });
    }
    for (auto& th : pool) th.join();
    if (failed.load()) std::rethrow_exception(error);
}

} // namespace hawkscan
