#pragma once

#include <cstdint>
#include <functional>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace impact {

/// Runs fn(i) for i in [0, n). Iterations own disjoint result slots and
/// independent simulation instances, so the OpenMP path and the serial
/// reference path produce identical results; tests assert this.
inline void for_each_index(std::int64_t n, bool parallel,
                           const std::function<void(std::int64_t)>& fn) {
#ifdef _OPENMP
    if (parallel) {
#pragma omp parallel for schedule(dynamic)
        for (std::int64_t i = 0; i < n; ++i)
            fn(i);
        return;
    }
#else
    (void)parallel;
#endif
    for (std::int64_t i = 0; i < n; ++i)
        fn(i);
}

} // namespace impact
