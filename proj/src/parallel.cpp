#include "memdex/parallel.hpp"

#include <cstdlib>
#include <string>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace memdex {

int configured_workers() {
  const char* env = std::getenv("MEMDEX_THREADS");
  if (!env || !*env) return 0;
  try {
    const int n = std::stoi(env);
    return n > 0 ? n : 0;
  } catch (const std::exception&) {
    return 0;
  }
}

void apply_worker_limit() {
#ifdef _OPENMP
  if (const int n = configured_workers(); n > 0) omp_set_num_threads(n);
#endif
}

int max_workers() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

WorkerScope::WorkerScope(int workers) : previous_(max_workers()) {
#ifdef _OPENMP
  if (workers > 0) omp_set_num_threads(workers);
#else
  (void)workers;
#endif
}

WorkerScope::~WorkerScope() {
#ifdef _OPENMP
  omp_set_num_threads(previous_);
#endif
}

}  // namespace memdex
