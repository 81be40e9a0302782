#include "pixagg/parallel.hpp"

#include <algorithm>
#include <atomic>
#include <thread>
#include <vector>

namespace pixagg {

namespace {
int g_threads = 1;
}

int thread_count() {
    return g_threads;
}

void set_thread_count(int n) {
    g_threads = std::max(1, n);
}

void parallel_for_chunks(int total, int chunk_count,
                         const std::function<void(int, int, int)>& fn) {
    chunk_count = std::clamp(chunk_count, 1, std::max(1, total));
    const int base = total / chunk_count;
    const int rem = total % chunk_count;
    auto bounds = [&](int c) {
        const int begin = c * base + std::min(c, rem);
        return std::pair<int, int>{begin, begin + base + (c < rem ? 1 : 0)};
    };
    const int workers = std::min(g_threads, chunk_count);
    if (workers <= 1) {
        for (int c = 0; c < chunk_count; ++c) {
            const auto [b, e] = bounds(c);
            fn(c, b, e);
        }
        return;
    }
    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (int t = 0; t < workers; ++t) {
        pool.emplace_back([&] {
            for (;;) {
                const int c = next.fetch_add(1);
                if (c >= chunk_count) break;
                const auto [b, e] = bounds(c);
                fn(c, b, e);
            }
        });
    }
    for (auto& th : pool) th.join();
}

} // namespace pixagg
