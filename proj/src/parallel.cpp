#include "pdfcorpus/parallel.hpp"

#include <omp.h>

namespace pdfcorpus {

namespace {
int default_threads() {
  static const int n = omp_get_max_threads();
  return n;
}
}  // namespace

void set_thread_count(int threads) {
  default_threads();
  omp_set_num_threads(threads > 0 ? threads : default_threads());
}

int thread_count() { return omp_get_max_threads(); }

}  // namespace pdfcorpus
