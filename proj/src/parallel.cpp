#include "rovi/common.hpp"

#include <algorithm>
#include <cstdlib>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace rovi::parallel {

namespace {

int env_cap() {
  const char* raw = std::getenv("ROVI_THREADS");
  if (raw == nullptr) return 0;
  char* end = nullptr;
  long v = std::strtol(raw, &end, 10);
  if (end == raw || v <= 0) return 0;
  return static_cast<int>(v);
}

}  // namespace

int threads() {
#ifdef _OPENMP
  int n = omp_get_max_threads();
#else
  int n = 1;
#endif
  static const int cap = env_cap();
  if (cap > 0) n = std::min(n, cap);
  return std::max(n, 1);
}

}  // namespace rovi::parallel
