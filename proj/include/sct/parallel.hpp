#pragma once

#ifdef _OPENMP
#include <omp.h>
#endif
#if defined(__GLIBC__) || defined(__linux__)
#include <malloc.h>
#endif

namespace sct {

inline int effective_workers(int requested) {
#ifdef _OPENMP
    return requested > 0 ? requested : omp_get_max_threads();
#else
    (void)requested;
    return 1;
#endif
}

/// Large scratch matrices are allocated and freed every iteration; keeping
/// them on the heap free-list instead of private mmaps avoids re-faulting the
/// pages each round.
inline void tune_allocator_once() {
#if defined(__GLIBC__) || defined(__linux__)
    static const bool done = [] {
        mallopt(M_MMAP_THRESHOLD, 1 << 30);
        mallopt(M_TRIM_THRESHOLD, 1 << 30);
        return true;
    }();
    (void)done;
#endif
}

}  // namespace sct
