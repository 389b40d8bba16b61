#ifndef GLLAB_PARALLEL_HPP
#define GLLAB_PARALLEL_HPP

#include <cstddef>
#include <functional>

namespace gllab {

/// Worker count: GLLAB_THREADS if set (>=1), else hardware concurrency.
int thread_count();

/// Runs body(begin, end) over contiguous chunks of [0, n). Chunking depends only on n and
/// the thread count; callers must write to disjoint outputs so results are order independent.
void parallel_for(std::size_t n, const std::function<void(std::size_t, std::size_t)>& body);

}  // namespace gllab

#endif
