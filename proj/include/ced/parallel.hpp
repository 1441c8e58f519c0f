#pragma once

#include <algorithm>
#include <cstddef>
#include <exception>
#include <thread>
#include <vector>

namespace ced {

/// Number of chunks parallel_for_chunks splits [0, n) into.
inline unsigned chunk_count(std::size_t n, unsigned workers) {
    if (workers <= 1 || n < 2 * static_cast<std::size_t>(workers)) return 1;
    return workers;
}

/// Runs body(begin, end, chunk) over contiguous chunks of [0, n), one thread
/// per chunk. With a single chunk the body runs on the calling thread. The
/// first exception thrown by any chunk is rethrown after all threads join.
template <typename Body>
void parallel_for_chunks(std::size_t n, unsigned workers, Body&& body) {
    const unsigned chunks = chunk_count(n, workers);
    if (chunks == 1) {
        body(std::size_t{0}, n, 0U);
        return;
    }
    const std::size_t chunk = (n + chunks - 1) / chunks;
    std::vector<std::thread> threads;
    std::vector<std::exception_ptr> errors(chunks);
    threads.reserve(chunks);
    for (unsigned c = 0; c < chunks; ++c) {
        const std::size_t begin = std::min(n, c * chunk);
        const std::size_t end = std::min(n, begin + chunk);
        threads.emplace_back([&, c, begin, end] {
            try {
                body(begin, end, c);
            } catch (...) {
                errors[c] = std::current_exception();
            }
        });
    }
    for (auto& t : threads) t.join();
    for (auto& e : errors)
        if (e) std::rethrow_exception(e);
}

}  // namespace ced
