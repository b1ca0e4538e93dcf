#pragma once

#include <cstddef>
#include <functional>

namespace qmlab {

// Number of worker threads: explicit value if > 0, else QMLAB_THREADS, else 1.
int resolve_threads(int requested = 0);

// Calls fn(i) for i in [0, count) on up to `threads` workers using static
// contiguous chunks. The first exception raised by any task is rethrown.
void parallel_for(std::size_t count, int threads, const std::function<void(std::size_t)>& fn);

}  // namespace qmlab
