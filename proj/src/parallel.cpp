#include "mreg/parallel.hpp"

#include <atomic>

namespace mreg {

namespace {
std::atomic<unsigned> g_jobs{0};
}

void set_max_jobs(unsigned jobs) { g_jobs = jobs; }

unsigned max_jobs() {
  const unsigned j = g_jobs.load();
  if (j > 0) return j;
  return std::max(1u, std::thread::hardware_concurrency());
}

double pairwise_sum(const double* x, std::size_t n) {
  if (n <= 8) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += x[i];
    return s;
  }
  const std::size_t m = n / 2;
  return pairwise_sum(x, m) + pairwise_sum(x + m, n - m);
}

}  // namespace mreg
