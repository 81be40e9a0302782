#pragma once

#include <functional>

namespace pixagg {

// Global worker cap for pixel-parallel loops (CLI --threads). Default 1.
int thread_count();
void set_thread_count(int n);

// Splits [0, total) into a fixed number of chunks (independent of the
// worker count, so results merge deterministically) and runs fn(chunk,
// begin, end) across workers.
void parallel_for_chunks(int total, int chunk_count,
                         const std::function<void(int, int, int)>& fn);

} // namespace pixagg
