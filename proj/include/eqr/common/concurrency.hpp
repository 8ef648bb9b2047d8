#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace eqr {

/// Runs fn(i) for i in [0, count) on at most `max_in_flight` threads.
/// If any call throws, the exception from the lowest failing index is
/// rethrown after all workers finish.
template <typename Fn>
void for_each_bounded(std::size_t count, std::size_t max_in_flight, Fn&& fn) {
    if (count == 0) return;
    const std::size_t workers = std::clamp<std::size_t>(max_in_flight, 1, count);
    if (workers == 1) {
        for (std::size_t i = 0; i < count; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::mutex error_mutex;
    std::size_t error_index = count;
    std::exception_ptr error;
    auto work = [&] {
        for (std::size_t i = next++; i < count; i = next++) {
            try {
                fn(i);
            } catch (...) {
                std::lock_guard lock(error_mutex);
                if (i < error_index) {
                    error_index = i;
                    error = std::current_exception();
                }
            }
        }
    };
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work);
    for (auto& t : pool) t.join();
    if (error) std::rethrow_exception(error);
}

}  // namespace eqr
