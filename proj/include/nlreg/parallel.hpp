#pragma once

#ifdef _OPENMP
#include <omp.h>
#endif

namespace nlreg {

/// Threads an OpenMP region will use; 1 when built without OpenMP.
inline int max_threads() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

/// Pins the OpenMP thread count for subsequent parallel regions.
inline void set_threads(int n) {
#ifdef _OPENMP
  if (n > 0) omp_set_num_threads(n);
#else
  (void)n;
#endif
}

}  // namespace nlreg
