#pragma once

#include <algorithm>
#include <cstddef>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

// Execution policy for the data-parallel kernels (batch model evaluation,
// DE populations, delay grids, per-road flux sweeps).  Every kernel keeps a
// serial reference path; results are independent of the thread count because
// reductions run over fixed index chunks, combined in chunk order.

namespace onramp {

enum class Exec { serial, parallel };

inline bool openmp_enabled() {
#ifdef _OPENMP
  return true;
#else
  return false;
#endif
}

inline int max_threads() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

// Plain element-wise loop, no reduction. body(i) must only write state owned
// by index i.
template <class Body>
void parallel_for(Exec exec, std::ptrdiff_t n, const Body& body) {
  if (exec == Exec::parallel) {
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < n; ++i) body(i);
    return;
#endif
  }
  for (std::ptrdiff_t i = 0; i < n; ++i) body(i);
}

// Deterministic sum reduction: partial sums per fixed-size chunk, combined in
// chunk order.  The summation order is therefore a function of (n, chunk)
// only, never of the schedule.
template <class Body>
double parallel_sum(Exec exec, std::ptrdiff_t n, const Body& body,
                    std::ptrdiff_t chunk = 1024) {
  if (n <= 0) return 0.0;
  const std::ptrdiff_t nchunks = (n + chunk - 1) / chunk;
  std::vector<double> partial(static_cast<size_t>(nchunks), 0.0);
  parallel_for(exec, nchunks, [&](std::ptrdiff_t c) {
    const std::ptrdiff_t lo = c * chunk;
    const std::ptrdiff_t hi = std::min(n, lo + chunk);
    double s = 0.0;
    for (std::ptrdiff_t i = lo; i < hi; ++i) s += body(i);
    partial[static_cast<size_t>(c)] = s;
  });
  double total = 0.0;
  for (double p : partial) total += p;
  return total;
}

}  // namespace onramp
