#pragma once

#include <algorithm>
#include <atomic>
#include <cstddef>
#include <exception>
#include <thread>
#include <vector>

namespace latcbc {

/// Run fn(i) for i in [0, count) on up to `threads` workers. The exception of
/// the lowest failing index is rethrown after all workers finish.
template <typename Fn>
void parallel_for(std::size_t count, unsigned threads, Fn&& fn) {
    std::vector<std::exception_ptr> errors(count);
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < count; i = next++) {
            try {
                fn(i);
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    const unsigned nt = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(count)));
    if (nt == 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (unsigned t = 0; t < nt; ++t) pool.emplace_back(worker);
    }
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

} // namespace latcbc
