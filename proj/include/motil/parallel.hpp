#ifndef MOTIL_PARALLEL_HPP
#define MOTIL_PARALLEL_HPP

#include <cstddef>
#include <functional>

namespace motil {

// Effective worker count: n <= 0 means hardware concurrency.
int resolve_threads(int requested);

// Runs fn(i) for i in [0, count) across up to `threads` workers with static
// chunking. fn must only write to per-index state, which keeps results
// independent of the worker count. Exceptions are rethrown on the caller.
void parallel_for(std::size_t count, int threads,
                  const std::function<void(std::size_t)>& fn);

} // namespace motil

#endif
