#pragma once

#include <cstdint>

namespace evlf {

/// Sets the OpenMP worker count used by the parallel kernels (0 = runtime
/// default). All kernels are written so results are identical for any count.
void set_worker_count(int n);

int worker_count();

/// Parallel loop over [0, n). Each index must write disjoint state; iteration
/// order must not matter (every kernel here satisfies both, so outputs are
/// bit-identical to the serial reference).
template <typename Fn>
void parallel_for_index(int n, Fn&& fn) {
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
    for (int i = 0; i < n; ++i) fn(i);
}

}  // namespace evlf
