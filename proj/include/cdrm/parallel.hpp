#pragma once

#include <cstddef>
#include <functional>

namespace cdrm {

// Worker count: CDRM_THREADS if set and positive, else hardware concurrency
// (at least 1).
int worker_count();

// Calls fn(i) for i in [0, n) across worker_count() threads. Each index runs
// exactly once; the first exception thrown is rethrown after all workers
// finish.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

}  // namespace cdrm
