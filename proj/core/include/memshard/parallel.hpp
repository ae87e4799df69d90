#pragma once

#include <cstddef>
#include <functional>

namespace memshard {

/// Runs fn(worker, index) for index in [0, n), statically striped across
/// min(workers, n) threads (worker w takes indices congruent to w). Work per
/// index must be independent; results are then identical for any worker
/// count. Exceptions are rethrown on the calling thread.
void parallel_stripes(std::size_t n, int workers,
                      const std::function<void(int, std::size_t)>& fn);

}  // namespace memshard
