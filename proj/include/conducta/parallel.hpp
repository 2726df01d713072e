#pragma once

#include <cstddef>
#include <functional>

namespace conducta {

/// Caps the number of worker threads used by parallel_for. 0 restores the
/// hardware default.
void set_max_threads(unsigned threads);
unsigned max_threads();

/// Runs body(i) for i in [0, count). Each index is visited exactly once;
/// bodies must only write to index-owned state. The first exception thrown by
/// any body is rethrown on the calling thread.
void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body);

}  // namespace conducta
