// One-time envelope sweep for the fractional-power equivalence (seed differs from the tests).
#include <cstdio>

#include "mreg/gelfand.hpp"
#include "mreg/random_models.hpp"

using namespace mreg;

int main() {
  Rng rng(20240917);
  for (double alpha : {0.1, 0.25, 0.4}) {
    double lo = 1e300, hi = 0;
    for (Eigen::Index d = 2; d <= 8; ++d) {
      double dlo = 1e300, dhi = 0;
      for (int i = 0; i < 1500; ++i) {
        const GelfandTriple T(random_spd(d, rng, std::pow(10.0, uniform(rng, 0, 4))));
        const Eigen::MatrixXcd A = random_coercive_matrix(T, 1.0, 10.0, rng);
        const Eigen::MatrixXcd P = FractionalPower(A).matrix(alpha) * T.power(-2 * alpha).cast<cplx>();
        Eigen::JacobiSVD<Eigen::MatrixXcd> svd(P);
        dlo = std::min(dlo, svd.singularValues()(d - 1));
        dhi = std::max(dhi, svd.singularValues()(0));
      }
      std::printf("alpha %.2f d %ld  [%.4f, %.4f]\n", alpha, static_cast<long>(d), dlo, dhi);
      lo = std::min(lo, dlo);
      hi = std::max(hi, dhi);
    }
    std::printf("alpha %.2f all [%.4f, %.4f]\n", alpha, lo, hi);
  }
}
