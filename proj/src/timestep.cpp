#include "mreg/timestep.hpp"

#include <algorithm>
#include <cmath>

#include "mreg/errors.hpp"
#include "mreg/fft.hpp"

namespace mreg {

namespace {

using Eigen::MatrixXcd;
using Eigen::VectorXcd;

// One-period propagation of a d x c block of states (columns), with or without forcing.
MatrixXcd propagate(const MatrixSampler& A, const Forcing* f, MatrixXcd U, double t0, double t1, std::size_t steps,
                    std::vector<VectorXcd>* record) {
  const double k = (t1 - t0) / static_cast<double>(steps);
  const auto d = U.rows();
  const MatrixXcd I = MatrixXcd::Identity(d, d);
  MatrixXcd An = A(t0);
  VectorXcd fn = f ? (*f)(t0) : VectorXcd::Zero(d);
  if (record) record->push_back(U.col(0));
  for (std::size_t j = 0; j < steps; ++j) {
    const double t = t0 + static_cast<double>(j + 1) * k;
    const MatrixXcd An1 = A(t);
    const VectorXcd fn1 = f ? (*f)(t) : VectorXcd::Zero(d);
    MatrixXcd rhs = (I - 0.5 * k * An) * U;
    if (f) rhs.colwise() += 0.5 * k * (fn + fn1);
    U = (I + 0.5 * k * An1).partialPivLu().solve(rhs);
    if (record) record->push_back(U.col(0));
    An = An1;
    fn = fn1;
  }
  return U;
}

}  // namespace

std::vector<VectorXcd> crank_nicolson(const MatrixSampler& A, const Forcing& f, const VectorXcd& u0, double t0,
                                      double t1, std::size_t steps) {
  if (steps == 0) throw StructuralError("at least one step is required");
  std::vector<VectorXcd> out;
  out.reserve(steps + 1);
  propagate(A, &f, MatrixXcd(u0), t0, t1, steps, &out);
  return out;
}

std::vector<VectorXcd> crank_nicolson_richardson(const MatrixSampler& A, const Forcing& f, const VectorXcd& u0,
                                                 double t0, double t1, std::size_t steps) {
  const auto coarse = crank_nicolson(A, f, u0, t0, t1, steps);
  const auto fine = crank_nicolson(A, f, u0, t0, t1, 2 * steps);
  std::vector<VectorXcd> out(coarse.size());
  for (std::size_t j = 0; j < coarse.size(); ++j) out[j] = (4.0 * fine[2 * j] - coarse[j]) / 3.0;
  return out;
}

Signal crank_nicolson_periodic(const MatrixSampler& A, const Forcing& f, const TimeGrid& grid, Eigen::Index dim,
                               std::size_t oversample, bool richardson) {
  const double t0 = -grid.period() / 2, t1 = grid.period() / 2;
  auto periodic = [&](std::size_t steps) {
    const MatrixXcd Phi = propagate(A, nullptr, MatrixXcd::Identity(dim, dim), t0, t1, steps, nullptr);
    const MatrixXcd psi = propagate(A, &f, MatrixXcd::Zero(dim, 1), t0, t1, steps, nullptr);
    const VectorXcd start = (MatrixXcd::Identity(dim, dim) - Phi).partialPivLu().solve(psi.col(0));
    return crank_nicolson(A, f, start, t0, t1, steps);
  };
  const std::size_t steps = grid.size() * oversample;
  std::vector<VectorXcd> u = periodic(steps);
  std::size_t stride = oversample;
  if (richardson) {
    const auto fine = periodic(2 * steps);
    for (std::size_t j = 0; j < u.size(); ++j) u[j] = (4.0 * fine[2 * j] - u[j]) / 3.0;
  }
  MatrixXcd out(static_cast<Eigen::Index>(grid.size()), dim);
  for (std::size_t k = 0; k < grid.size(); ++k) out.row(static_cast<Eigen::Index>(k)) = u[k * stride].transpose();
  return Signal(grid, std::move(out));
}

Forcing spectral_interpolant(const Signal& f) {
  const TimeGrid grid = f.grid();
  const MatrixXcd c = fft(f.values());
  const std::size_t n = grid.size();
  const double t0 = grid.time(0), scale = 1.0 / std::sqrt(static_cast<double>(n));
  return [grid, c, n, t0, scale](double t) -> VectorXcd {
    VectorXcd v = VectorXcd::Zero(c.cols());
    for (std::size_t m = 0; m < n; ++m) {
      const double xi = grid.frequency(m);
      const auto row = c.row(static_cast<Eigen::Index>(m)).transpose();
      if (m == n / 2)
        v += std::cos(xi * (t - t0)) * row;
      else
        v += std::polar(1.0, xi * (t - t0)) * row;
    }
    return v * scale;
  };
}

Forcing window_interpolant(const Signal& f, int points) {
  const TimeGrid& g = f.grid();
  if (!g.has_window()) throw StructuralError("window interpolation needs a windowed grid");
  const std::size_t i0 = g.window_first(), i1 = g.window_last();
  const auto q = static_cast<std::size_t>(points);
  if (i1 - i0 + 1 < q) throw StructuralError("window has fewer nodes than the interpolation stencil");
  const MatrixXcd v = f.values();
  return [g, v, i0, i1, q](double t) -> VectorXcd {
    const double x = (t - g.time(i0)) / g.spacing();
    const auto centre = static_cast<long>(std::floor(x)) - static_cast<long>(q / 2) + 1;
    const std::size_t first =
        i0 + static_cast<std::size_t>(std::clamp<long>(centre, 0, static_cast<long>(i1 - i0 + 1 - q)));
    VectorXcd out = VectorXcd::Zero(v.cols());
    for (std::size_t j = 0; j < q; ++j) {
      double w = 1.0;
      const double tj = g.time(first + j);
      for (std::size_t m = 0; m < q; ++m)
        if (m != j) w *= (t - g.time(first + m)) / (tj - g.time(first + m));
      out += w * v.row(static_cast<Eigen::Index>(first + j)).transpose();
    }
    return out;
  };
}

}  // namespace mreg
