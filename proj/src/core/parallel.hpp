#pragma once

#include <exception>
#include <functional>
#include <thread>
#include <vector>

namespace dfl {

inline int resolve_threads(int requested) {
    if (requested > 0) return requested;
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(hw);
}

// Runs fn(0..count-1) across `threads` workers. Each index owns its output
// slot, so scheduling cannot affect results. If any call throws, the
// exception of the lowest index is rethrown after all workers join.
inline void parallel_for(int count, int threads, const std::function<void(int)>& fn) {
    threads = resolve_threads(threads);
    if (threads <= 1 || count <= 1) {
        for (int i = 0; i < count; ++i) fn(i);
        return;
    }
    std::vector<std::exception_ptr> errors(static_cast<std::size_t>(count));
    std::vector<std::thread> workers;
    workers.reserve(static_cast<std::size_t>(threads));
    for (int t = 0; t < threads; ++t)
        workers.emplace_back([&, t]() {
            for (int i = t; i < count; i += threads) {
                try {
                    fn(i);
                } catch (...) {
                    errors[static_cast<std::size_t>(i)] = std::current_exception();
                }
            }
        });
    for (auto& w : workers) w.join();
    for (const auto& err : errors)
        if (err) std::rethrow_exception(err);
}

} // namespace dfl
