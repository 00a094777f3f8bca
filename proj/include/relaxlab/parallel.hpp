#ifndef RELAXLAB_PARALLEL_HPP
#define RELAXLAB_PARALLEL_HPP

#include <cstddef>
#include <functional>

namespace relaxlab {

/// Worker count: hardware concurrency capped by RELAXLAB_THREADS when set.
unsigned thread_count();

/// Runs body(i) for i in [0, n). Each index is visited exactly once; body
/// must only write to per-index state. The first exception is rethrown.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace relaxlab

#endif  // RELAXLAB_PARALLEL_HPP
