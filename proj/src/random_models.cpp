#include "mreg/random_models.hpp"

#include <cmath>

#include "mreg/errors.hpp"

namespace mreg {

double uniform(Rng& rng, double a, double b) { return std::uniform_real_distribution<double>(a, b)(rng); }

Eigen::MatrixXcd random_complex(Eigen::Index r, Eigen::Index c, Rng& rng) {
  std::normal_distribution<double> nd;
  Eigen::MatrixXcd m(r, c);
  for (Eigen::Index j = 0; j < c; ++j)
    for (Eigen::Index i = 0; i < r; ++i) m(i, j) = cplx(nd(rng), nd(rng));
  return m;
}

Eigen::MatrixXd random_spd(Eigen::Index d, Rng& rng, double cond) {
  std::normal_distribution<double> nd;
  Eigen::MatrixXd g(d, d);
  for (Eigen::Index j = 0; j < d; ++j)
    for (Eigen::Index i = 0; i < d; ++i) g(i, j) = nd(rng);
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(g);
  const Eigen::MatrixXd Q = qr.householderQ();
  Eigen::VectorXd lam(d);
  for (Eigen::Index i = 0; i < d; ++i) lam(i) = std::exp(uniform(rng, 0.0, std::log(cond)));
  lam(0) = 1.0;
  if (d > 1) lam(d - 1) = cond;
  Eigen::MatrixXd B = Q * lam.asDiagonal() * Q.transpose();
  return 0.5 * (B + B.transpose());
}

Eigen::MatrixXcd random_normalized_form(Eigen::Index d, double eta, double M, Rng& rng) {
  if (!(eta > 0.0 && M >= eta)) throw DomainError("need 0 < eta <= M");
  const Eigen::MatrixXcd G = random_complex(d, d, rng);
  Eigen::HouseholderQR<Eigen::MatrixXcd> qr(G);
  const Eigen::MatrixXcd U = qr.householderQ();
  Eigen::VectorXd lam(d);
  for (Eigen::Index i = 0; i < d; ++i) lam(i) = uniform(rng, eta, M);
  lam(0) = eta;
  const Eigen::MatrixXcd P = U * lam.cast<cplx>().asDiagonal() * U.adjoint();
  Eigen::MatrixXcd K = random_complex(d, d, rng);
  K = (0.5 * (K - K.adjoint())).eval();
  auto norm_at = [&](double t) {
    Eigen::JacobiSVD<Eigen::MatrixXcd> svd(P + t * K);
    return svd.singularValues()(0);
  };
  if (norm_at(0.0) >= M) return P;
  double lo = 0.0, hi = 1.0;
  while (norm_at(hi) < M) hi *= 2;
  for (int it = 0; it < 200 && hi - lo > 1e-15 * hi; ++it) {
    const double mid = 0.5 * (lo + hi);
    (norm_at(mid) < M ? lo : hi) = mid;
  }
  return P + lo * K;
}

Eigen::MatrixXcd random_coercive_matrix(const GelfandTriple& T, double eta, double M, Rng& rng) {
  const Eigen::MatrixXcd C = random_normalized_form(T.dim(), eta, M, rng);
  const Eigen::MatrixXcd S = T.power(1.0).cast<cplx>();
  return S * C * S;
}

}  // namespace mreg
