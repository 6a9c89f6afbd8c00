#pragma once

#include <cstddef>
#include <vector>

#if defined(_OPENMP)
#include <omp.h>
#endif

namespace cellpop::par {

inline int num_threads() {
#if defined(_OPENMP)
  return omp_get_max_threads();
#else
  return 1;
#endif
}

inline void set_num_threads(int n) {
#if defined(_OPENMP)
  if (n > 0) omp_set_num_threads(n);
#else
  (void)n;
#endif
}

// Plain left-to-right accumulation; reference path for tests and benchmarks.
inline double sum_serial(const double* v, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += v[i];
  return s;
}

// Chunked sum: fixed-size chunks reduced in index order, so the result does
// not depend on the number of threads. All solver mass/residual reductions go
// through here to keep artifacts byte-identical under any --jobs setting.
inline double sum_deterministic(const double* v, std::size_t n) {
  constexpr std::size_t kChunk = 1024;
  const std::size_t nc = (n + kChunk - 1) / kChunk;
  if (nc <= 1) return sum_serial(v, n);
  std::vector<double> partial(nc, 0.0);
#if defined(_OPENMP)
#pragma omp parallel for schedule(static)
#endif
  for (long long c = 0; c < static_cast<long long>(nc); ++c) {
    const std::size_t lo = static_cast<std::size_t>(c) * kChunk;
    const std::size_t hi = lo + kChunk < n ? lo + kChunk : n;
    double s = 0.0;
    for (std::size_t i = lo; i < hi; ++i) s += v[i];
    partial[static_cast<std::size_t>(c)] = s;
  }
  double total = 0.0;
  for (double p : partial) total += p;
  return total;
}

template <class F>
inline void parallel_for(long long n, F&& body) {
#if defined(_OPENMP)
#pragma omp parallel for schedule(static)
#endif
  for (long long i = 0; i < n; ++i) body(i);
}

// Dynamic schedule for unevenly sized work items (PDE solves in grid
// searches, Monte Carlo replications). Each item writes only its own slot.
template <class F>
inline void parallel_for_dynamic(long long n, F&& body) {
#if defined(_OPENMP)
#pragma omp parallel for schedule(dynamic, 1)
#endif
  for (long long i = 0; i < n; ++i) body(i);
}

}  // namespace cellpop::par
