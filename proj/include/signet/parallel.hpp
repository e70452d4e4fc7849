#pragma once

#include <cstddef>
#include <functional>

namespace signet {

// Global cap on worker threads. 0 means "use hardware concurrency".
void set_thread_count(unsigned n);
unsigned thread_count();

// Runs body(i) for i in [0, n). Each index is processed exactly once; callers
// write results into per-index slots so the outcome does not depend on the
// schedule. Exceptions from workers are rethrown on the calling thread.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

// Splits [0, n) into a few contiguous ranges per worker (each at least
// min_chunk long) and runs body(begin, end) on each.
void parallel_ranges(std::size_t n, std::size_t min_chunk,
                     const std::function<void(std::size_t, std::size_t)>& body);

}  // namespace signet
