#pragma once

#include <cstddef>
#include <functional>

namespace ripless {

/// Runs body(i) for i in [0, count) on up to `threads` workers pulling from a
/// shared counter. threads == 0 means hardware concurrency. The first
/// exception thrown by any task is rethrown after all workers stop.
void parallel_for(std::size_t count, unsigned threads, const std::function<void(std::size_t)>& body);

unsigned resolve_threads(unsigned requested);

}  // namespace ripless
