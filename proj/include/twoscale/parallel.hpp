#pragma once

#include <cstddef>
#include <functional>

namespace twoscale {

/// Caps the worker pool used by parallel_for. 0 restores the hardware default.
void set_num_threads(unsigned n);
unsigned num_threads();

/// Runs body(begin, end) over contiguous chunks of [0, n). Chunk boundaries
/// depend only on n and the thread count; every index is owned by one chunk.
void parallel_for(std::size_t n, const std::function<void(std::size_t, std::size_t)>& body);

}  // namespace twoscale
