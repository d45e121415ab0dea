#pragma once

#include <cstddef>
#include <functional>

namespace nonlin {

/// Worker count: NONLIN_THREADS if set (>= 1), else hardware concurrency.
unsigned worker_count();

/// Runs body(begin, end) over contiguous chunks of [0, n). Chunks are disjoint,
/// so bodies that write only their own slots need no synchronisation. Results
/// must not depend on the chunking.
void parallel_for(std::size_t n, const std::function<void(std::size_t, std::size_t)>& body,
                  std::size_t min_chunk = 64);

} // namespace nonlin
