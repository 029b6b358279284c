/**
 * @file parallel.hpp
 * @brief Deterministic static-partition parallel loop capped by QEXP_THREADS.
 */
#pragma once

#include <cstddef>
#include <functional>

namespace qexp {

/// Worker count: QEXP_THREADS if set and positive, else hardware concurrency.
unsigned thread_count();

/// Runs body(i) for i in [0, n). Each index is written by exactly one worker,
/// so results do not depend on scheduling. The first exception is rethrown.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace qexp
