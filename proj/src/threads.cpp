#include "silo/threads.hpp"

#include <cstdlib>
#include <string>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace silo {

void apply_thread_env() {
#ifdef _OPENMP
  if (const char* env = std::getenv("SILO_THREADS")) {
    try {
      const int n = std::stoi(env);
      if (n >= 1) omp_set_num_threads(n);
    } catch (...) {
      // Unparsable value: leave the runtime default in place.
    }
  }
#endif
}

int max_threads() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

}  // namespace silo
