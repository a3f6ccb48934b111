#pragma once

#include <cstddef>
#include <functional>

namespace aas
{

/// Caps worker threads used by row-parallel loops (0 = hardware concurrency).
void set_num_threads(unsigned n);
unsigned num_threads();

/// Runs body(i) for i in [0, n) over contiguous chunks. Each index is handled
/// by exactly one worker, so results written per index are independent of the
/// thread count.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

} // namespace aas
