#pragma once

#include <cstddef>
#include <functional>

namespace vinecls {

/// Number of worker threads used by internal parallel loops (>= 1).
std::size_t worker_count();
void set_worker_count(std::size_t n);

/// Runs body(i) for i in [0, n). Each index is processed exactly once; callers
/// write results into slot i so output never depends on scheduling.
/// The first exception thrown by any body is rethrown after all workers join.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace vinecls
