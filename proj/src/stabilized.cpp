#include "mreg/stabilized.hpp"

#include <cmath>
#include <random>

#include "mreg/errors.hpp"
#include "mreg/fft.hpp"
#include "mreg/fourier.hpp"
#include "mreg/solver.hpp"

namespace mreg {

namespace {

Eigen::VectorXcd test_symbol(const TimeGrid& grid, const StabilizedSpec& s) {
  const std::size_t n = grid.size();
  Eigen::VectorXcd phi(static_cast<Eigen::Index>(n));
  for (std::size_t k = 0; k < n; ++k) {
    const double xi = grid.frequency(k);
    const double sg = xi > 0 ? 1.0 : (xi < 0 ? -1.0 : 0.0);
    const cplx stab(1.0, s.delta * sg);
    phi(static_cast<Eigen::Index>(k)) = s.alpha == 0.0 ? stab : stab * std::pow(std::abs(xi), 2 * s.alpha) + s.rho;
  }
  return phi;
}

Eigen::MatrixXd norm_weights(const GelfandTriple& T, const TimeGrid& grid, double alpha) {
  const std::size_t n = grid.size();
  Eigen::MatrixXd w(static_cast<Eigen::Index>(n), T.dim());
  for (std::size_t k = 0; k < n; ++k) {
    const double a = std::abs(grid.frequency(k));
    for (Eigen::Index j = 0; j < T.dim(); ++j) {
      const double lam = T.eigenvalues()(j);
      w(static_cast<Eigen::Index>(k), j) =
          alpha == 0.0 ? a + lam : std::pow(a, 1 + 2 * alpha) + (1 + std::pow(a, 2 * alpha)) * lam;
    }
  }
  return w;
}

void check_spec(const StabilizedSpec& s) {
  if (!(s.alpha >= 0.0 && s.alpha <= 0.5)) throw DomainError("stabilized form needs alpha in [0, 1/2]");
  if (!(s.delta > 0.0 && s.delta < 1.0)) throw DomainError("stabilization delta must lie in (0,1)");
  if (!(s.rho >= 0.0)) throw DomainError("rho must be nonnegative");
}

}  // namespace

Eigen::MatrixXcd to_spectral(const GelfandTriple& T, const Signal& u) {
  return fft(u.values()) * T.eigenvectors().cast<cplx>();
}

Signal from_spectral(const GelfandTriple& T, const TimeGrid& grid, const Eigen::MatrixXcd& c) {
  return Signal(grid, ifft(c * T.eigenvectors().transpose().cast<cplx>()));
}

cplx stabilized_form(const SpaceTimeOperator& A, const Signal& v, const Signal& w, const StabilizedSpec& s) {
  check_spec(s);
  const Signal r = time_derivative(v) + A.apply(v);
  return l2_inner(r, apply_symbol(test_symbol(v.grid(), s), w));
}

double stabilized_norm_sq(const GelfandTriple& T, const Signal& v, double alpha) {
  const Eigen::MatrixXcd c = to_spectral(T, v);
  const Eigen::MatrixXd w = norm_weights(T, v.grid(), alpha);
  return v.grid().spacing() * (w.array() * c.cwiseAbs2().array()).sum();
}

CoercivityMeasure measure_stabilized_coercivity(const SpaceTimeOperator& A, const GelfandTriple& T,
                                                const StabilizedSpec& s, std::size_t dense_limit, int lanczos_steps) {
  check_spec(s);
  const TimeGrid& grid = A.grid();
  const auto n = static_cast<Eigen::Index>(grid.size()), d = T.dim();
  const Eigen::Index N = n * d;
  const Eigen::VectorXcd phi = test_symbol(grid, s);
  const Eigen::ArrayXXd winv = norm_weights(T, grid, s.alpha).array().rsqrt();
  CollocationSystem K(A);

  auto reshape = [&](const Eigen::VectorXcd& x) { return Eigen::Map<const Eigen::MatrixXcd>(x.data(), n, d).eval(); };
  // X = W^{-1/2} Herm(S) W^{-1/2}, S = conj(phi) spec(K phys(.)).
  auto apply_X = [&](const Eigen::VectorXcd& x) -> Eigen::VectorXcd {
    const Eigen::MatrixXcd c = (reshape(x).array() * winv).matrix();
    const Signal u = from_spectral(T, grid, c);
    Eigen::MatrixXcd s1 = to_spectral(T, K.apply(u));
    s1 = phi.conjugate().asDiagonal() * s1;
    const Signal pu = from_spectral(T, grid, phi.asDiagonal() * c);
    const Signal adj = time_derivative(pu).scaled(-1.0) + A.apply_adjoint(pu);
    const Eigen::MatrixXcd s2 = to_spectral(T, adj);
    const Eigen::MatrixXcd y = (0.5 * (s1 + s2).array() * winv).matrix();
    return Eigen::Map<const Eigen::VectorXcd>(y.data(), N);
  };

  CoercivityMeasure out;
  if (static_cast<std::size_t>(N) <= dense_limit) {
    Eigen::MatrixXcd X(N, N);
    for (Eigen::Index i = 0; i < N; ++i) X.col(i) = apply_X(Eigen::VectorXcd::Unit(N, i));
    X = (0.5 * (X + X.adjoint())).eval();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(X, Eigen::EigenvaluesOnly);
    out.value = es.eigenvalues()(0);
    out.method = "dense";
    out.steps = static_cast<int>(N);
    return out;
  }
  // Lanczos with full reorthogonalization; the smallest Ritz value bounds the minimum from above.
  const int m = static_cast<int>(std::min<Eigen::Index>(N, lanczos_steps));
  std::mt19937_64 rng(0x5eed);
  std::normal_distribution<double> nd;
  Eigen::VectorXcd q(N);
  for (Eigen::Index i = 0; i < N; ++i) q(i) = cplx(nd(rng), nd(rng));
  q.normalize();
  std::vector<Eigen::VectorXcd> Q{q};
  std::vector<double> al, be;
  for (int j = 0; j < m; ++j) {
    Eigen::VectorXcd w = apply_X(Q.back());
    al.push_back(Q.back().dot(w).real());
    for (int pass = 0; pass < 2; ++pass)
      for (const auto& qi : Q) w -= qi.dot(w) * qi;
    const double b = w.norm();
    if (b < 1e-13 || j + 1 == m) break;
    be.push_back(b);
    Q.push_back(w / b);
  }
  const auto k = static_cast<Eigen::Index>(al.size());
  Eigen::MatrixXd Tm = Eigen::MatrixXd::Zero(k, k);
  for (Eigen::Index i = 0; i < k; ++i) {
    Tm(i, i) = al[static_cast<std::size_t>(i)];
    if (i + 1 < k) Tm(i, i + 1) = Tm(i + 1, i) = be[static_cast<std::size_t>(i)];
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(Tm, Eigen::EigenvaluesOnly);
  out.value = es.eigenvalues()(0);
  out.method = "lanczos";
  out.steps = static_cast<int>(k);
  return out;
}

}  // namespace mreg
