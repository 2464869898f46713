#pragma once

#include <algorithm>
#include <cstddef>
#include <exception>
#include <functional>
#include <thread>
#include <vector>

namespace sdist {

/// Execution settings shared by the numeric modules. threads == 1 is the
/// sequential, bit-reproducible mode and the default everywhere.
struct ExecPolicy {
    unsigned threads = 1;

    bool sequential() const { return threads <= 1; }
};

/// Splits [0, n) into at most `threads` contiguous chunks and runs
/// fn(chunk_index, begin, end) for each. Chunk boundaries depend only on
/// (n, threads), so per-chunk partial results combine deterministically.
inline void parallel_chunks(std::size_t n, const ExecPolicy& exec,
                            const std::function<void(std::size_t, std::size_t, std::size_t)>& fn) {
    const std::size_t chunks = std::max<std::size_t>(1, std::min<std::size_t>(exec.threads, n));
    if (chunks == 1) {
        fn(0, 0, n);
        return;
    }
    std::vector<std::thread> workers;
    std::vector<std::exception_ptr> failures(chunks);
    workers.reserve(chunks);
    for (std::size_t c = 0; c < chunks; ++c) {
        const std::size_t begin = n * c / chunks;
        const std::size_t end = n * (c + 1) / chunks;
        workers.emplace_back([&fn, &failures, c, begin, end] {
            try {
                fn(c, begin, end);
            } catch (...) {
                failures[c] = std::current_exception();
            }
        });
    }
    for (auto& w : workers) w.join();
    for (auto& f : failures) {
        if (f) std::rethrow_exception(f);
    }
}

inline std::size_t chunk_count(std::size_t n, const ExecPolicy& exec) {
    return std::max<std::size_t>(1, std::min<std::size_t>(exec.threads, n));
}

}  // namespace sdist
