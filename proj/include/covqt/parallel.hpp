#pragma once

#include <cstddef>
#include <functional>

namespace covqt {

/// Worker-thread cap from COVQT_THREADS; 0 or unset means hardware concurrency.
unsigned thread_budget();

/// Runs fn(begin, end) over a static partition of [0, count) on up to
/// thread_budget() threads. Ranges are disjoint, so writers never collide.
void parallel_for(std::size_t count, const std::function<void(std::size_t, std::size_t)>& fn);

} // namespace covqt
