#pragma once

#include <cstddef>
#include <functional>

namespace dirac {

/// Worker count: DIRAC_ECHO_THREADS when set to a positive integer, otherwise
/// the hardware concurrency (0 or unset means auto).
unsigned worker_count();

/// Runs body(k) for k in [0, n) over contiguous chunks. Each index is handled by
/// exactly one worker, so results written per index do not depend on scheduling.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace dirac
