#pragma once

#include <cstdint>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace ergosol::par {

/// 0 = let the runtime choose.
void set_threads(int n);
int threads();

/// Static index-parallel loop. Each index writes only its own outputs, so
/// results do not depend on scheduling or thread count.
template <class F>
void parallel_for(std::int64_t n, F&& body) {
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
    for (std::int64_t i = 0; i < n; ++i) body(i);
#else
    for (std::int64_t i = 0; i < n; ++i) body(i);
#endif
}

template <class F>
void serial_for(std::int64_t n, F&& body) {
    for (std::int64_t i = 0; i < n; ++i) body(i);
}

}  // namespace ergosol::par
