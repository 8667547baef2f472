#pragma once

#include <cstddef>
#include <functional>

namespace apwdg {

// Worker count used by assembly loops, sweeps and the BLAS backend.
void set_num_threads(int n);
int num_threads();

// Runs body(i) for i in [begin, end) over num_threads() workers with dynamic chunking.
// The first exception thrown by any worker is rethrown on the caller.
void parallel_for(std::size_t begin, std::size_t end, const std::function<void(std::size_t)>& body);

}  // namespace apwdg
