#pragma once

#include <cstddef>
#include <functional>

namespace star {

// Worker cap: STAR_THREADS when set (0 or 1 disables threading), otherwise
// hardware concurrency.
size_t thread_budget();

// Runs fn(i) for i in [0, n) across at most thread_budget() workers using a
// blocked static split. Callers must write only to per-index slots; any
// cross-index reduction happens after the call, in index order, so results
// do not depend on the worker count.
void parallel_for(size_t n, const std::function<void(size_t)>& fn);

}  // namespace star
