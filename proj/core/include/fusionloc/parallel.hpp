#pragma once

#include <cstddef>
#include <functional>

namespace fusionloc {

// Number of worker threads used by data-parallel loops. Defaults to the
// hardware concurrency; override with the FUSIONLOC_THREADS environment
// variable. Each loop index is computed independently, so results are
// bit-identical for any thread count.
std::size_t worker_threads();

// Runs fn(i) for i in [0, n). Falls back to a serial loop when n or the
// configured thread count is small.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

}  // namespace fusionloc
