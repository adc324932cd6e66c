#include "mreg/fft.hpp"

#include <fftw3.h>

#include <cmath>
#include <map>
#include <mutex>
#include <utility>

namespace mreg {

namespace {

// fftw planning is not thread-safe; execution with the new-array interface is.
class PlanCache {
 public:
  ~PlanCache() {
    for (auto& [key, plan] : plans_) fftw_destroy_plan(plan);
  }

  fftw_plan get(int n, int sign) {
    std::lock_guard<std::mutex> lock(mu_);
    auto it = plans_.find({n, sign});
    if (it != plans_.end()) return it->second;
    auto* buf = fftw_alloc_complex(static_cast<std::size_t>(n));
    fftw_plan p = fftw_plan_dft_1d(n, buf, buf, sign, FFTW_ESTIMATE | FFTW_UNALIGNED);
    fftw_free(buf);
    plans_.emplace(std::make_pair(n, sign), p);
    return p;
  }

 private:
  std::mutex mu_;
  std::map<std::pair<int, int>, fftw_plan> plans_;
};

PlanCache& cache() {
  static PlanCache c;
  return c;
}

void transform(Eigen::MatrixXcd& x, int sign) {
  const int n = static_cast<int>(x.rows());
  fftw_plan p = cache().get(n, sign);
  for (Eigen::Index j = 0; j < x.cols(); ++j) {
    auto* col = reinterpret_cast<fftw_complex*>(x.col(j).data());
    fftw_execute_dft(p, col, col);
  }
  x *= 1.0 / std::sqrt(static_cast<double>(n));
}

}  // namespace

void fft_columns(Eigen::MatrixXcd& x) { transform(x, FFTW_FORWARD); }
void ifft_columns(Eigen::MatrixXcd& x) { transform(x, FFTW_BACKWARD); }

Eigen::MatrixXcd fft(const Eigen::MatrixXcd& x) {
  Eigen::MatrixXcd y = x;
  fft_columns(y);
  return y;
}

Eigen::MatrixXcd ifft(const Eigen::MatrixXcd& x) {
  Eigen::MatrixXcd y = x;
  ifft_columns(y);
  return y;
}

}  // namespace mreg
