#pragma once

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace storesim {

inline int resolve_parallelism(int requested) {
    if (requested > 0) return requested;
    const unsigned hw = std::thread::hardware_concurrency();
    return hw > 0 ? static_cast<int>(hw) : 1;
}

/// Runs fn(i) for i in [0, count) on up to `parallelism` threads.
/// Work is handed out in fixed-size chunks via an atomic counter; fn must
/// only write to per-index slots, which keeps results independent of the
/// scheduling order and of the thread count.
template <typename Fn>
void parallel_for_index(std::int64_t count, int parallelism, Fn&& fn) {
    parallelism = resolve_parallelism(parallelism);
    if (count <= 0) return;
    if (parallelism <= 1 || count == 1) {
        for (std::int64_t i = 0; i < count; ++i) fn(i);
        return;
    }

    constexpr std::int64_t chunk = 8;
    std::atomic<std::int64_t> next{0};
    std::mutex error_mutex;
    std::exception_ptr error;

    auto worker = [&] {
        while (true) {
            const std::int64_t begin = next.fetch_add(chunk);
            if (begin >= count) return;
            const std::int64_t end = std::min(begin + chunk, count);
            try {
                for (std::int64_t i = begin; i < end; ++i) fn(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!error) error = std::current_exception();
                return;
            }
        }
    };

    std::vector<std::thread> threads;
    const int n_threads = static_cast<int>(std::min<std::int64_t>(parallelism, count));
    threads.reserve(static_cast<std::size_t>(n_threads));
    for (int i = 0; i < n_threads; ++i) threads.emplace_back(worker);
    for (auto& t : threads) t.join();
    if (error) std::rethrow_exception(error);
}

} // namespace storesim
