#pragma once

#include <cstddef>
#include <functional>

namespace funcount {

/// Worker count: FUNCOUNT_THREADS if set and positive, otherwise the
/// hardware concurrency (at least 1).
std::size_t thread_count();

/// Runs body(i) for i in [0, n). Iterations must not share mutable state;
/// the first exception thrown by any iteration is rethrown on the caller.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace funcount
