#include "mreg/quadrature.hpp"

#include "mreg/errors.hpp"
#include "mreg/parallel.hpp"

namespace mreg {

std::vector<std::vector<double>> fornberg_weights(double z, const std::vector<double>& x, int max_order) {
  const std::size_t n = x.size();
  if (n == 0 || max_order < 0) throw StructuralError("finite-difference stencil is empty");
  const auto mo = static_cast<std::size_t>(max_order);
  std::vector<std::vector<double>> c(mo + 1, std::vector<double>(n, 0.0));
  double c1 = 1.0, c4 = x[0] - z;
  c[0][0] = 1.0;
  for (std::size_t i = 1; i < n; ++i) {
    const std::size_t mn = std::min(i, mo);
    double c2 = 1.0;
    const double c5 = c4;
    c4 = x[i] - z;
    for (std::size_t j = 0; j < i; ++j) {
      const double c3 = x[i] - x[j];
      c2 *= c3;
      if (j == i - 1) {
        for (std::size_t k = mn; k >= 1; --k)
          c[k][i] = c1 * (static_cast<double>(k) * c[k - 1][i - 1] - c5 * c[k][i - 1]) / c2;
        c[0][i] = -c1 * c5 * c[0][i - 1] / c2;
      }
      for (std::size_t k = mn; k >= 1; --k) c[k][j] = (c4 * c[k][j] - static_cast<double>(k) * c[k - 1][j]) / c3;
      c[0][j] = c4 * c[0][j] / c3;
    }
    c1 = c2;
  }
  return c;
}

std::vector<double> gregory_weights(std::size_t N) {
  std::vector<double> w(N, 1.0);
  if (N < 2) return std::vector<double>(N, 0.0);
  if (N < 8) {
    w.front() = w.back() = 0.5;
    return w;
  }
  const double end[3] = {3.0 / 8, 7.0 / 6, 23.0 / 24};
  for (std::size_t i = 0; i < 3; ++i) w[i] = w[N - 1 - i] = end[i];
  return w;
}

double gregory_integral(const std::vector<double>& f, double h) {
  const auto w = gregory_weights(f.size());
  std::vector<double> t(f.size());
  for (std::size_t i = 0; i < f.size(); ++i) t[i] = w[i] * f[i];
  return h * pairwise_sum(t);
}

}  // namespace mreg
