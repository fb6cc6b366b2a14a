#pragma once

#include <cstddef>
#include <functional>

namespace addkit {

/// Worker count: hardware concurrency, capped by the ADDKIT_THREADS
/// environment variable when it is set to a positive integer.
std::size_t worker_count();

/// Runs body(i) for i in [0, n). Iterations must be independent; results
/// must not depend on the schedule.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace addkit
