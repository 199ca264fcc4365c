#pragma once

#include <cstddef>
#include <functional>

namespace qm {

// Worker count: QM_THREADS if set and positive, else hardware concurrency.
unsigned thread_count();

// Runs body(i) for i in [0, n). Each index is processed exactly once; callers
// write results into per-index slots so output order never depends on timing.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace qm
