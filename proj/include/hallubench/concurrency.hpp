/// @file concurrency.hpp
/// @brief Rate limiting and an order-preserving bounded worker pool.
#pragma once

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstddef>
#include <exception>
#include <functional>
#include <mutex>
#include <optional>
#include <thread>
#include <vector>

namespace hallubench {

/// Admits at most `rps` calls per second by spacing admissions evenly.
class RateLimiter {
public:
    explicit RateLimiter(std::optional<double> rps) {
        if (rps && *rps > 0.0)
            interval_ = std::chrono::duration_cast<Clock::duration>(
                std::chrono::duration<double>(1.0 / *rps));
    }

    void acquire() {
        if (interval_ == Clock::duration::zero()) return;
        Clock::time_point slot;
        {
            std::lock_guard lock(mutex_);
            const auto now = Clock::now();
            slot = std::max(now, next_);
            next_ = slot + interval_;
        }
        std::this_thread::sleep_until(slot);
    }

private:
    using Clock = std::chrono::steady_clock;
    std::mutex mutex_;
    Clock::time_point next_{};
    Clock::duration interval_{Clock::duration::zero()};
};

/// Runs fn(i) for i in [0, n) on up to `workers` threads. Results come back in
/// index order regardless of completion order. The first exception thrown by
/// any task is rethrown after all workers join.
template <typename R>
std::vector<R> parallel_map(std::size_t n, std::size_t workers,
                            const std::function<R(std::size_t)>& fn) {
    std::vector<std::optional<R>> slots(n);
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;

    auto worker = [&] {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= n) return;
            try {
                slots[i].emplace(fn(i));
            } catch (...) {
                std::lock_guard lock(failure_mutex);
                if (!failure) failure = std::current_exception();
            }
        }
    };

    workers = std::clamp<std::size_t>(workers, 1, std::max<std::size_t>(n, 1));
    if (workers == 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        pool.reserve(workers);
        for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(worker);
    }
    if (failure) std::rethrow_exception(failure);

    std::vector<R> out;
    out.reserve(n);
    for (auto& s : slots) out.push_back(std::move(*s));
    return out;
}

} // namespace hallubench
