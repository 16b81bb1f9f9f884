#pragma once

#include <cstddef>
#include <exception>
#include <limits>

#if defined(_OPENMP)
#include <omp.h>
#endif

namespace formation {

/// Selects the OpenMP path or the serial reference loop. Both produce
/// identical results: every iteration writes only its own output slot.
enum class Execution { kSerial, kParallel };

/// Runs body(i) for i in [0, count). An exception thrown by any iteration is
/// rethrown after the loop; when several throw, the lowest index wins so the
/// two execution paths report the same failure.
template <class Body>
void parallel_for(std::size_t count, Execution exec, Body&& body) {
  if (exec == Execution::kSerial || count < 2) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
#if defined(_OPENMP)
  std::exception_ptr failure;
  std::size_t failed_at = std::numeric_limits<std::size_t>::max();
  const long long n = static_cast<long long>(count);
#pragma omp parallel for schedule(dynamic)
  for (long long i = 0; i < n; ++i) {
    try {
      body(static_cast<std::size_t>(i));
    } catch (...) {
#pragma omp critical(formation_parallel_for)
      {
        if (static_cast<std::size_t>(i) < failed_at) {
          failed_at = static_cast<std::size_t>(i);
          failure = std::current_exception();
        }
      }
    }
  }
  if (failure) std::rethrow_exception(failure);
#else
  for (std::size_t i = 0; i < count; ++i) body(i);
#endif
}

inline int max_threads() {
#if defined(_OPENMP)
  return omp_get_max_threads();
#else
  return 1;
#endif
}

}  // namespace formation
