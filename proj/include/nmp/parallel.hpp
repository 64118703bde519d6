#pragma once

#include <cstddef>
#include <functional>

namespace nmp {

/// Worker count: NMP_THREADS when set (>= 1), otherwise hardware concurrency.
std::size_t worker_count();

/// Runs body(begin, end) over fixed-size chunks of [0, n). Chunk boundaries do
/// not depend on the worker count, so per-chunk results are reproducible.
void parallel_for(std::size_t n, std::size_t chunk,
                  const std::function<void(std::size_t, std::size_t)>& body);

}  // namespace nmp
