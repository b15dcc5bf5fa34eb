#pragma once

#include <cstdint>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace ucc {

// Global worker-count knob for the OpenMP kernels. 0 = library default.
// Results must not depend on the value: per-trial seeding plus order-free
// (integer) or fixed-order reductions everywhere.
inline int& worker_count() {
    static int w = 0;
    return w;
}

inline int effective_workers() {
#ifdef _OPENMP
    const int w = worker_count();
    return w > 0 ? w : omp_get_max_threads();
#else
    return 1;
#endif
}

// Parallel loop over [0, n). Body must be safe to run concurrently for
// distinct indices. Serial when OpenMP is absent or one worker requested.
template <typename Body>
void parallel_for_index(std::int64_t n, const Body& body) {
#ifdef _OPENMP
    const int w = effective_workers();
    if (w > 1) {
#pragma omp parallel for schedule(static) num_threads(w)
        for (std::int64_t i = 0; i < n; ++i) body(i);
        return;
    }
#endif
    for (std::int64_t i = 0; i < n; ++i) body(i);
}

// Serial reference loop, kept distinct so tests can compare kernels
// against it directly.
template <typename Body>
void serial_for_index(std::int64_t n, const Body& body) {
    for (std::int64_t i = 0; i < n; ++i) body(i);
}

}  // namespace ucc
