#pragma once

#include <cstddef>
#include <functional>

namespace outerlab {

/// Runs body(i) for i in [0, count) on up to `threads` worker threads (0 = hardware
/// concurrency). Work is claimed dynamically; callers write results by index so the
/// outcome never depends on scheduling. The first exception thrown is rethrown.
void parallel_for(std::size_t count, std::size_t threads, const std::function<void(std::size_t)>& body);

}  // namespace outerlab
