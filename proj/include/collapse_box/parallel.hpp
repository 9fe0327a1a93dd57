#pragma once

#include <cstddef>
#include <functional>

namespace cbox {

/// Effective worker count: `hint` (0 = hardware concurrency), capped by the
/// COLLAPSE_BOX_THREADS environment variable, at least 1.
unsigned resolve_workers(unsigned hint);

/// Calls fn(begin, end, worker) over contiguous blocks of [0, count). Blocks
/// depend only on (count, workers).
void parallel_blocks(std::size_t count, unsigned workers,
                     const std::function<void(std::size_t, std::size_t, unsigned)>& fn);

}  // namespace cbox
