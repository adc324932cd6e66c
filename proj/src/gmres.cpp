#include "mreg/gmres.hpp"

#include <cmath>

namespace mreg {

using cplx = std::complex<double>;

GmresResult gmres(const LinearMap& A, const LinearMap& Minv, const Eigen::VectorXcd& b, const Eigen::VectorXcd& x0,
                  const GmresOptions& opt) {
  GmresResult res;
  res.x = x0;
  const double bnorm = b.norm();
  if (bnorm == 0.0) {
    res.x.setZero(b.size());
    res.converged = true;
    return res;
  }
  const int m = std::max(1, opt.restart);
  Eigen::VectorXcd r = b - A(res.x);
  double rel = r.norm() / bnorm;
  res.residual = rel;
  while (res.iterations < opt.max_iter) {
    if (rel <= opt.tol) break;
    const double beta = r.norm();
    std::vector<Eigen::VectorXcd> V;
    V.reserve(static_cast<std::size_t>(m + 1));
    V.push_back(r / beta);
    Eigen::MatrixXcd H = Eigen::MatrixXcd::Zero(m + 1, m);
    Eigen::VectorXcd cs = Eigen::VectorXcd::Zero(m), sn = Eigen::VectorXcd::Zero(m);
    Eigen::VectorXcd g = Eigen::VectorXcd::Zero(m + 1);
    g(0) = beta;
    int j = 0;
    for (; j < m && res.iterations < opt.max_iter; ++j) {
      Eigen::VectorXcd w = A(Minv(V[static_cast<std::size_t>(j)]));
      // Modified Gram-Schmidt with one reorthogonalization pass.
      for (int pass = 0; pass < 2; ++pass)
        for (int i = 0; i <= j; ++i) {
          const cplx hij = V[static_cast<std::size_t>(i)].dot(w);
          H(i, j) += hij;
          w -= hij * V[static_cast<std::size_t>(i)];
        }
      H(j + 1, j) = w.norm();
      for (int i = 0; i < j; ++i) {
        const cplx t = std::conj(cs(i)) * H(i, j) + std::conj(sn(i)) * H(i + 1, j);
        H(i + 1, j) = -sn(i) * H(i, j) + cs(i) * H(i + 1, j);
        H(i, j) = t;
      }
      const double a = std::abs(H(j, j)), bb = std::abs(H(j + 1, j));
      const double den = std::hypot(a, bb);
      if (den == 0.0) {
        cs(j) = 1;
        sn(j) = 0;
      } else {
        cs(j) = H(j, j) / den;
        sn(j) = H(j + 1, j) / den;
      }
      H(j, j) = den;
      H(j + 1, j) = 0;
      g(j + 1) = -sn(j) * g(j);
      g(j) = std::conj(cs(j)) * g(j);
      ++res.iterations;
      rel = std::abs(g(j + 1)) / bnorm;
      res.history.push_back(rel);
      if (H(j + 1, j) == 0.0 && bb == 0.0) {
        ++j;
        break;
      }
      V.push_back(w / bb);
      if (rel <= opt.tol) {
        ++j;
        break;
      }
    }
    // Back substitution on the leading j x j triangle.
    Eigen::VectorXcd y = H.topLeftCorner(j, j).triangularView<Eigen::Upper>().solve(g.head(j));
    Eigen::VectorXcd z = Eigen::VectorXcd::Zero(b.size());
    for (int i = 0; i < j; ++i) z += y(i) * V[static_cast<std::size_t>(i)];
    res.x += Minv(z);
    r = b - A(res.x);
    rel = r.norm() / bnorm;
  }
  res.residual = rel;
  res.converged = rel <= opt.tol;
  return res;
}

}  // namespace mreg
