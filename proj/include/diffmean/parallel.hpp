#pragma once

#include <cstddef>
#include <functional>

namespace diffmean {

/// Worker count: DIFFMEAN_THREADS if set to a positive integer, else hardware concurrency.
std::size_t thread_count();

/**
 * Runs fn(i) for i in [0, n) on up to thread_count() threads. Callers write
 * results into per-index slots, so output never depends on scheduling. The
 * exception from the lowest failing index is rethrown.
 */
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

}  // namespace diffmean
