#pragma once

#include <cstdlib>
#include <exception>
#include <string>
#include <thread>
#include <vector>

namespace rffsim::sim {

inline unsigned worker_count() {
    if (const char* env = std::getenv("RFFSIM_THREADS")) {
        const int v = std::atoi(env);
        if (v >= 1) return static_cast<unsigned>(v);
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw ? hw : 1;
}

// Run fn(i) for i in [0, n) on a strided worker pool. Each index writes only
// its own output slot, so results are independent of scheduling; the first
// exception is rethrown after the join.
template <typename F>
void parallel_for_index(int n, F&& fn) {
    const unsigned workers = std::min<unsigned>(worker_count(), n > 0 ? n : 1);
    if (workers <= 1) {
        for (int i = 0; i < n; ++i) fn(i);
        return;
    }
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(workers);
    for (unsigned w = 0; w < workers; ++w) {
        pool.emplace_back([&, w]() {
            try {
                for (int i = static_cast<int>(w); i < n; i += static_cast<int>(workers)) {
                    fn(i);
                }
            } catch (...) {
                errors[w] = std::current_exception();
            }
        });
    }
    for (auto& t : pool) t.join();
    for (const auto& e : errors) {
        if (e) std::rethrow_exception(e);
    }
}

}  // namespace rffsim::sim
