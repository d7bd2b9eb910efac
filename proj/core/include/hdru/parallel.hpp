/**
 * parallel.hpp - index-parallel loop capped by HDRU_THREADS
 */
#pragma once

#include <cstddef>
#include <functional>

namespace hdru {

/// Worker count: HDRU_THREADS if set to a positive integer, else hardware concurrency.
unsigned worker_count();

/// Runs fn(i) for i in [0, n) across worker_count() threads. Each index runs
/// exactly once; the first exception thrown is rethrown after all workers join.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

}  // namespace hdru
