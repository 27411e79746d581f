#pragma once

#include <cstddef>

namespace parkcast {

/// Worker count after resolving `jobs`: 0 means "all available", otherwise
/// the value is clamped to at least 1.
int resolve_jobs(int jobs);

/// Runs body(i) for i in [0, n) on up to `jobs` OpenMP workers. Iterations
/// must be independent; results must be written to disjoint, pre-allocated
/// slots so the outcome is identical to the serial reference for any
/// schedule. Falls back to a plain loop when OpenMP is unavailable or
/// jobs resolves to 1.
template <typename Body>
void parallel_for(std::size_t n, int jobs, const Body& body);

/// Serial reference for parallel_for: the plain loop, kept as the behaviour
/// oracle for the OpenMP path.
template <typename Body>
void serial_for(std::size_t n, const Body& body) {
  for (std::size_t i = 0; i < n; ++i) body(i);
}

}  // namespace parkcast

#if defined(_OPENMP)
#include <omp.h>

#include <exception>
#include <mutex>

namespace parkcast {

inline int resolve_jobs(int jobs) {
  if (jobs <= 0) return omp_get_max_threads();
  return jobs;
}

template <typename Body>
void parallel_for(std::size_t n, int jobs, const Body& body) {
  const int workers = resolve_jobs(jobs);
  if (workers == 1 || n <= 1) {
    serial_for(n, body);
    return;
  }
  // Exceptions may not escape an OpenMP region; the first one is kept and
  // rethrown on the calling thread.
  std::exception_ptr first_error;
  std::mutex error_mutex;
  const long long count = static_cast<long long>(n);
#pragma omp parallel for schedule(dynamic) num_threads(workers)
  for (long long i = 0; i < count; ++i) {
    try {
      body(static_cast<std::size_t>(i));
    } catch (...) {
      std::lock_guard<std::mutex> lock(error_mutex);
      if (!first_error) first_error = std::current_exception();
    }
  }
  if (first_error) std::rethrow_exception(first_error);
}

}  // namespace parkcast

#else

namespace parkcast {

inline int resolve_jobs(int jobs) { return jobs <= 0 ? 1 : jobs; }

template <typename Body>
void parallel_for(std::size_t n, int /*jobs*/, const Body& body) {
  serial_for(n, body);
}

}  // namespace parkcast

#endif
