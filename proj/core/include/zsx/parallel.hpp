#pragma once

#include <cstddef>
#include <functional>

namespace zsx {

// Number of workers used when the caller passes jobs == 0.
std::size_t default_jobs();

// Runs fn(i) for i in [0, n) on up to `jobs` threads. Work items must write
// only to their own slot. If any item throws, the exception of the lowest
// failing index is rethrown after all workers stop, so failures are
// independent of scheduling.
void parallel_for(std::size_t n, std::size_t jobs,
                  const std::function<void(std::size_t)>& fn);

}  // namespace zsx
