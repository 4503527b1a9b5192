#pragma once

#include <cstddef>
#include <functional>

namespace sbp {

/// Worker count from SBP_THREADS, falling back to the hardware concurrency.
int worker_count();

/// Calls body(i) for i in [0, n). Indices are split into contiguous blocks,
/// one block per worker, so every output slot is written by exactly one
/// thread and results do not depend on the worker count.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace sbp
