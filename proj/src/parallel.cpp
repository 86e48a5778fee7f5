#include "dspn/parallel.hpp"

#include <omp.h>

#include <cstdlib>
#include <string>

namespace dspn {

int configure_threads_from_env() {
  if (const char* env = std::getenv("DSPN_THREADS"); env != nullptr && *env != '\0') {
    try {
      const int cap = std::stoi(env);
      if (cap > 0 && cap < omp_get_max_threads()) omp_set_num_threads(cap);
    } catch (const std::exception&) {
      // Unparseable caps are ignored.
    }
  }
  return omp_get_max_threads();
}

void set_thread_count(int threads) {
  if (threads > 0) omp_set_num_threads(threads);
}

int max_threads() { return omp_get_max_threads(); }

int thread_index() { return omp_get_thread_num(); }

}  // namespace dspn
