#pragma once

#include <algorithm>
#include <cstddef>
#include <thread>
#include <vector>

namespace mreg {

// Worker count for parallel loops; 0 selects hardware concurrency.
void set_max_jobs(unsigned jobs);
unsigned max_jobs();

// Runs fn(i) for i in [0, n). Each index must write only its own outputs, so the
// result does not depend on scheduling.
template <class Fn>
void parallel_for(std::size_t n, Fn&& fn) {
  const std::size_t workers = std::min<std::size_t>(max_jobs(), n);
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w)
    pool.emplace_back([&, w] {
      for (std::size_t i = w; i < n; i += workers) fn(i);
    });
  for (auto& t : pool) t.join();
}

// Pairwise sum, fixed association order.
double pairwise_sum(const double* x, std::size_t n);
inline double pairwise_sum(const std::vector<double>& x) { return pairwise_sum(x.data(), x.size()); }

}  // namespace mreg
