#pragma once

// Minimal deterministic task-parallel loop: tasks are numbered, each task
// writes only to its own output slot, and the assignment of tasks to
// threads never influences results.

#include <atomic>
#include <cstdint>
#include <exception>
#include <mutex>
#include <thread>
#include <vector>

namespace eqpart {

// Runs fn(task_index) for every index in [0, task_count) on up to
// `threads` workers.  The first exception thrown by any task is rethrown
// on the caller after all workers finish.
template <typename Fn>
void parallel_for(std::int64_t task_count, int threads, Fn&& fn) {
    if (task_count <= 0) return;
    if (threads <= 1 || task_count == 1) {
        for (std::int64_t i = 0; i < task_count; ++i) fn(i);
        return;
    }
    const int workers = static_cast<int>(
        std::min<std::int64_t>(threads, task_count));
    std::atomic<std::int64_t> next{0};
    std::atomic<bool> failed{false};
    std::exception_ptr error;
    std::mutex error_mutex;

    auto body = [&] {
        for (;;) {
            const std::int64_t i = next.fetch_add(1);
            if (i >= task_count || failed.load()) return;
            try {
                fn(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mutex);
                if (!failed.exchange(true)) error = std::current_exception();
                return;
            }
        }
    };
    std::vector<std::thread> pool;
    pool.reserve(static_cast<size_t>(workers));
    for (int t = 0; t < workers; ++t) pool.emplace_back(body);
    for (auto& th : pool) th.join();
    if (error) std::rethrow_exception(error);
}

} // namespace eqpart
