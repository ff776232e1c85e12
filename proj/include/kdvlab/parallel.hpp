#pragma once

// Deterministic index-parallel loop. Each index writes only its own slot and
// draws only from its own substream, so the result is independent of how the
// indices are scheduled across threads. KDVLAB_THREADS overrides the thread
// count (useful to force serial runs).

#include <atomic>
#include <cstdlib>
#include <functional>
#include <mutex>
#include <thread>
#include <vector>

namespace kdvlab {

inline unsigned worker_count() {
    if (const char* env = std::getenv("KDVLAB_THREADS")) {
        const long v = std::strtol(env, nullptr, 10);
        if (v >= 1) return static_cast<unsigned>(v);
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : hw;
}

template <typename Fn>
void parallel_for(std::size_t count, Fn&& fn) {
    const unsigned workers = worker_count();
    if (workers <= 1 || count <= 1) {
        for (std::size_t i = 0; i < count; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    std::exception_ptr error;
    std::mutex error_mu;
    auto body = [&] {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= count) return;
            try {
                fn(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(error_mu);
                if (!error) error = std::current_exception();
                return;
            }
        }
    };
    for (unsigned w = 0; w < workers; ++w) pool.emplace_back(body);
    for (auto& t : pool) t.join();
    if (error) std::rethrow_exception(error);
}

} // namespace kdvlab
