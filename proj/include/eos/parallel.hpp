#pragma once

#include <cstddef>
#include <functional>

namespace eos {

unsigned default_threads();

// Runs fn(0) ... fn(n - 1) on up to `threads` workers (0: default). The first exception
// thrown by any task is rethrown after all workers finish.
void parallel_for(std::size_t n, unsigned threads, const std::function<void(std::size_t)>& fn);

} // namespace eos
