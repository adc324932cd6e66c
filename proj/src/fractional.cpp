#include "mreg/fractional.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <numbers>

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <boost/math/special_functions/zeta.hpp>

#include "mreg/errors.hpp"
#include "mreg/fft.hpp"

namespace mreg {

namespace {

constexpr double kPi = std::numbers::pi;

double c_alpha_uncached(double alpha) {
  const double g = 1.0 + 2.0 * alpha;
  // [0,1]: 1 - cos s = 2 sin^2(s/2) avoids cancellation near the origin.
  boost::math::quadrature::tanh_sinh<double> ts;
  const double inner = ts.integrate(
      [g](double s) {
        if (s < 1e-100) return 0.5 * std::pow(s, 2 - g);
        const double sh = std::sin(s / 2);
        return 2.0 * sh * sh / std::pow(s, g);
      },
      0.0, 1.0, 1e-15);
  // [1,inf): the algebraic part is exact; the cosine part is rotated onto s = 1 + iy,
  // where it becomes i e^{i} int_0^inf e^{-y} (1+iy)^{-g} dy.
  boost::math::quadrature::exp_sinh<double> es;
  const double re = es.integrate([g](double y) { return std::exp(-y) * std::pow(cplx(1.0, y), -g).real(); }, 1e-15);
  const double im = es.integrate([g](double y) { return std::exp(-y) * std::pow(cplx(1.0, y), -g).imag(); }, 1e-15);
  const double cos_tail = (cplx(0.0, 1.0) * std::polar(1.0, 1.0) * cplx(re, im)).real();
  const double half_line = inner + 1.0 / (2.0 * alpha) - cos_tail;
  return 4.0 * half_line;
}

Eigen::MatrixXcd mapped_values(const Signal& u, const SeminormOptions& opt) {
  if (!opt.norm_map) return u.values();
  if (opt.norm_map->cols() != u.dim()) throw StructuralError("norm map dimension mismatch");
  return u.values() * opt.norm_map->transpose();
}

double powp(double r, double p) { return p == 2.0 ? r * r : std::pow(r, p); }

void check_alpha(double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw DomainError("alpha must lie in (0,1)");
}

// D(x_j) = int |u(t + x_j) - u(t)|^p dt over the admissible t, for j = 1..N.
std::vector<double> shift_integrals_window(const Eigen::MatrixXcd& x, std::size_t i0, std::size_t i1, double p,
                                           double h) {
  const std::size_t N = i1 - i0;
  std::vector<double> D(N + 1, 0.0);
  for (std::size_t j = 1; j < N; ++j) {
    double s = 0.0;
    for (std::size_t k = i0; k + j <= i1; ++k) {
      const double w = (k == i0 || k + j == i1) ? 0.5 : 1.0;
      s += w * powp((x.row(static_cast<Eigen::Index>(k + j)) - x.row(static_cast<Eigen::Index>(k))).norm(), p);
    }
    D[j] = h * s;
  }
  return D;
}

// Periodic shifts: D(x_j) = h sum_k |u_{k+j mod n} - u_k|^p.
std::vector<double> shift_integrals_torus(const Eigen::MatrixXcd& x, double p, double h) {
  const std::size_t n = static_cast<std::size_t>(x.rows());
  std::vector<double> D(n + 1, 0.0);
  if (p == 2.0) {
    Eigen::MatrixXcd f = fft(x);
    Eigen::MatrixXcd power(x.rows(), 1);
    power.col(0) = f.cwiseAbs2().rowwise().sum().cast<cplx>();
    ifft_columns(power);
    const double e = x.squaredNorm();
    const double scale = std::sqrt(static_cast<double>(n));
    for (std::size_t j = 1; j < n; ++j)
      D[j] = h * std::max(0.0, 2.0 * e - 2.0 * scale * power(static_cast<Eigen::Index>(j), 0).real());
    return D;
  }
  for (std::size_t j = 1; j < n; ++j) {
    double s = 0.0;
    for (std::size_t k = 0; k < n; ++k)
      s += powp((x.row(static_cast<Eigen::Index>((k + j) % n)) - x.row(static_cast<Eigen::Index>(k))).norm(), p);
    D[j] = h * s;
  }
  return D;
}

std::vector<double> shift_integrals_line(const Eigen::MatrixXcd& x, double p, double h, double& d_inf) {
  const std::size_t n = static_cast<std::size_t>(x.rows());
  std::vector<double> D(n, 0.0);
  if (p == 2.0) {
    const Eigen::Index N2 = static_cast<Eigen::Index>(2 * n);
    Eigen::MatrixXcd pad = Eigen::MatrixXcd::Zero(N2, x.cols());
    pad.topRows(x.rows()) = x;
    fft_columns(pad);
    Eigen::MatrixXcd power(N2, 1);
    power.col(0) = pad.cwiseAbs2().rowwise().sum().cast<cplx>();
    ifft_columns(power);
    const double e = x.squaredNorm();
    const double scale = std::sqrt(static_cast<double>(N2));
    for (std::size_t j = 1; j < n; ++j)
      D[j] = h * std::max(0.0, 2.0 * e - 2.0 * scale * power(static_cast<Eigen::Index>(j), 0).real());
    d_inf = 2.0 * h * e;
    return D;
  }
  std::vector<double> mag(n), prefix(n + 1, 0.0);
  for (std::size_t k = 0; k < n; ++k) {
    mag[k] = powp(x.row(static_cast<Eigen::Index>(k)).norm(), p);
    prefix[k + 1] = prefix[k] + mag[k];
  }
  for (std::size_t j = 1; j < n; ++j) {
    double s = prefix[j] + (prefix[n] - prefix[n - j]);
    for (std::size_t k = 0; k + j < n; ++k)
      s += powp((x.row(static_cast<Eigen::Index>(k + j)) - x.row(static_cast<Eigen::Index>(k))).norm(), p);
    D[j] = h * s;
  }
  d_inf = 2.0 * h * prefix[n];
  return D;
}

}  // namespace

double c_alpha(double alpha) {
  if (!(alpha > 1e-3 && alpha < 1.0 - 1e-3)) throw DomainError("c_alpha needs alpha in (0,1) away from the endpoints");
  static std::mutex mu;
  static std::map<double, double> memo;
  {
    std::lock_guard<std::mutex> lock(mu);
    if (auto it = memo.find(alpha); it != memo.end()) return it->second;
  }
  const double v = c_alpha_uncached(alpha);
  std::lock_guard<std::mutex> lock(mu);
  memo.emplace(alpha, v);
  return v;
}

double hurwitz_zeta(double s, double a) {
  if (!(s > 1.0) || !(a > 0.0)) throw DomainError("Hurwitz zeta needs s > 1, a > 0");
  constexpr int M = 32;
  double acc = 0.0;
  for (int m = 0; m < M; ++m) acc += std::pow(m + a, -s);
  // Euler-Maclaurin remainder from M + a.
  const double b = M + a;
  acc += std::pow(b, 1 - s) / (s - 1) + 0.5 * std::pow(b, -s) + s / 12.0 * std::pow(b, -s - 1) -
         s * (s + 1) * (s + 2) / 720.0 * std::pow(b, -s - 3) +
         s * (s + 1) * (s + 2) * (s + 3) * (s + 4) / 30240.0 * std::pow(b, -s - 5);
  return acc;
}

double singular_trapezoid(const std::vector<double>& g, double h, double beta, bool correct) {
  if (!(beta > -1.0)) throw DomainError("singular exponent must exceed -1");
  const std::size_t N = g.size();
  if (N == 0) return 0.0;
  double s = 0.0;
  for (std::size_t j = 1; j <= N; ++j) {
    const double w = j == N ? 0.5 : 1.0;
    s += w * std::pow(static_cast<double>(j) * h, beta) * g[j - 1];
  }
  s *= h;
  if (!correct || N < 4) return s;
  // Quadratic fit g(x) = c0 + c1 x + c2 x^2 through the first three nodes.
  const double g1 = g[0], g2 = g[1], g3 = g[2];
  const double c0 = 3 * g1 - 3 * g2 + g3;
  const double c1 = (-2.5 * g1 + 4 * g2 - 1.5 * g3) / h;
  const double c2 = (g1 - 2 * g2 + g3) / (2 * h * h);
  using boost::math::zeta;
  s -= zeta(-beta) * c0 * std::pow(h, 1 + beta);
  s -= zeta(-beta - 1) * c1 * std::pow(h, 2 + beta);
  s -= zeta(-beta - 2) * c2 * std::pow(h, 3 + beta);
  return s;
}

double gagliardo_integral(const Signal& u, double alpha, double p, const SeminormOptions& opt) {
  check_alpha(alpha);
  if (!(p >= 1.0) || !std::isfinite(p)) throw DomainError("p must be finite and >= 1");
  const Eigen::MatrixXcd x = mapped_values(u, opt);
  const double h = u.grid().spacing();
  const double beta = p - 1.0 - alpha * p;
  std::vector<double> g;
  double tail = 0.0;
  if (opt.domain == SeminormDomain::torus) {
    // All periodic images at distance x + mL fold into a Hurwitz-zeta weight on (0, L).
    const auto D = shift_integrals_torus(x, p, h);
    const double L = u.grid().period(), s = 1.0 + alpha * p;
    const std::size_t n = u.size();
    double images = 0.0;
    for (std::size_t j = 1; j <= n; ++j) {
      const double xj = static_cast<double>(j) * h;
      g.push_back(D[j] / std::pow(xj, p));
      images += D[j] * std::pow(L, -s) * hurwitz_zeta(s, 1.0 + xj / L);
    }
    tail = h * images;
  } else if (opt.domain == SeminormDomain::window) {
    const auto& grid = u.grid();
    if (!grid.has_window()) throw StructuralError("window seminorm needs an interval window");
    const auto D = shift_integrals_window(x, grid.window_first(), grid.window_last(), p, h);
    for (std::size_t j = 1; j < D.size(); ++j) g.push_back(D[j] / std::pow(static_cast<double>(j) * h, p));
  } else {
    double d_inf = 0.0;
    const auto D = shift_integrals_line(x, p, h, d_inf);
    for (std::size_t j = 1; j < D.size(); ++j) g.push_back(D[j] / std::pow(static_cast<double>(j) * h, p));
    const double L = u.grid().period();
    g.push_back(d_inf / std::pow(L, p));
    tail = d_inf * std::pow(L, -alpha * p) / (alpha * p);
  }
  return 2.0 * (singular_trapezoid(g, h, beta, opt.diagonal_correction) + tail);
}

double gagliardo_seminorm(const Signal& u, double alpha, double p, const SeminormOptions& opt) {
  return std::pow(std::max(0.0, gagliardo_integral(u, alpha, p, opt)), 1.0 / p);
}

double holder_seminorm(const Signal& u, double alpha) {
  if (!(alpha >= 0.0 && alpha < 1.0)) throw DomainError("Hoelder index must lie in [0,1)");
  const auto& grid = u.grid();
  const std::size_t i0 = grid.has_window() ? grid.window_first() : 0;
  const std::size_t i1 = grid.has_window() ? grid.window_last() : grid.size() - 1;
  const double h = grid.spacing();
  const Eigen::MatrixXcd& x = u.values();
  double best = 0.0;
  for (std::size_t j = 1; j <= i1 - i0; ++j) {
    const double scale = std::pow(static_cast<double>(j) * h, -alpha);
    double m = 0.0;
    for (std::size_t k = i0; k + j <= i1; ++k)
      m = std::max(m, (x.row(static_cast<Eigen::Index>(k + j)) - x.row(static_cast<Eigen::Index>(k))).squaredNorm());
    best = std::max(best, std::sqrt(m) * scale);
  }
  return best;
}

double smooth_step(double x) {
  if (x <= 0.0) return 1.0;
  if (x >= 1.0) return 0.0;
  const double a = std::exp(-1.0 / (1.0 - x)), b = std::exp(-1.0 / x);
  return a / (a + b);
}

ReflectExtension extend_reflect(const Signal& u) {
  const auto& grid = u.grid();
  if (!grid.has_window()) throw StructuralError("extend_reflect needs an interval window");
  const std::size_t i0 = grid.window_first(), i1 = grid.window_last();
  const std::size_t m = i1 - i0;
  if (i0 < m || i1 + m > grid.size()) throw StructuralError("insufficient padding for the reflection");
  Eigen::MatrixXcd v = Eigen::MatrixXcd::Zero(u.values().rows(), u.dim());
  const auto& x = u.values();
  for (std::size_t k = i0; k <= i1; ++k) v.row(static_cast<Eigen::Index>(k)) = x.row(static_cast<Eigen::Index>(k));
  for (std::size_t j = 1; j < m; ++j) {
    const double phi = smooth_step(static_cast<double>(j) / static_cast<double>(m));
    v.row(static_cast<Eigen::Index>(i0 - j)) = phi * x.row(static_cast<Eigen::Index>(i0 + j));
    v.row(static_cast<Eigen::Index>(i1 + j)) = phi * x.row(static_cast<Eigen::Index>(i1 - j));
  }
  nlohmann::json meta = {{"cutoff", "smooth step e^{-1/(1-x)}/(e^{-1/(1-x)}+e^{-1/x}) on each flank"},
                         {"support", {grid.window().a - grid.window().length(), grid.window().b + grid.window().length()}},
                         {"K_max", kReflectBound},
                         {"K_alpha", 0.3},
                         {"K_p", 2.0}};
  return {u.with_values(std::move(v)), std::move(meta)};
}

namespace {

// int_I |u(s) - u(e)|^p |s - e|^{-alpha p} ds with e the chosen endpoint.
double boundary_term(const Signal& u, Side side, double alpha, double p) {
  const auto& grid = u.grid();
  const std::size_t i0 = grid.window_first(), i1 = grid.window_last();
  const std::size_t N = i1 - i0;
  const double h = grid.spacing();
  const auto& x = u.values();
  const Eigen::Index e = static_cast<Eigen::Index>(side == Side::left ? i0 : i1);
  std::vector<double> g(N);
  for (std::size_t j = 1; j <= N; ++j) {
    const Eigen::Index k = static_cast<Eigen::Index>(side == Side::left ? i0 + j : i1 - j);
    const double xj = static_cast<double>(j) * h;
    g[j - 1] = powp((x.row(k) - x.row(e)).norm() / xj, p);
  }
  return singular_trapezoid(g, h, p - alpha * p);
}

}  // namespace

ConstExtension extend_const(const Signal& u, Side side, double alpha, double p) {
  check_alpha(alpha);
  if (!(alpha * p > 1.0)) throw DomainError("constant extension needs alpha*p > 1");
  const auto& grid = u.grid();
  if (!grid.has_window()) throw StructuralError("extend_const needs an interval window");
  const std::size_t i0 = grid.window_first(), i1 = grid.window_last();
  Eigen::MatrixXcd v = Eigen::MatrixXcd::Zero(u.values().rows(), u.dim());
  const auto& x = u.values();
  for (std::size_t k = i0; k <= i1; ++k) v.row(static_cast<Eigen::Index>(k)) = x.row(static_cast<Eigen::Index>(k));
  if (side == Side::left)
    for (std::size_t k = 0; k < i0; ++k) v.row(static_cast<Eigen::Index>(k)) = x.row(static_cast<Eigen::Index>(i0));
  else
    for (std::size_t k = i1 + 1; k < grid.size(); ++k)
      v.row(static_cast<Eigen::Index>(k)) = x.row(static_cast<Eigen::Index>(i1));

  SeminormOptions w;
  w.domain = SeminormDomain::window;
  const double inner = std::max(0.0, gagliardo_integral(u, alpha, p, w));
  const double outer = inner + 2.0 / (alpha * p) * boundary_term(u, side, alpha, p);
  ConstExtension out{u.with_values(std::move(v)), 1.0, std::pow(outer, 1 / p), std::pow(inner, 1 / p)};
  if (out.interval_seminorm > 0.0) out.seminorm_ratio = out.extended_seminorm / out.interval_seminorm;
  return out;
}

HardyReport hardy_check(const Signal& u, double alpha, double p) {
  check_alpha(alpha);
  if (!(alpha * p > 1.0)) throw DomainError("Hardy bound needs alpha*p > 1");
  if (!u.grid().has_window()) throw StructuralError("Hardy check needs an interval window");
  HardyReport r;
  r.lhs = std::pow(boundary_term(u, Side::left, alpha, p), 1 / p);
  SeminormOptions w;
  w.domain = SeminormDomain::window;
  r.seminorm = gagliardo_seminorm(u, alpha, p, w);
  r.constant = (1 + alpha - 1 / p) / (alpha - 1 / p);
  r.ratio = r.seminorm > 0 ? r.lhs / r.seminorm : 0.0;
  r.holds = r.lhs <= r.constant * r.seminorm;
  return r;
}

nlohmann::json LpEmbeddingReport::to_json() const {
  return {{"alpha", alpha},         {"p_target", p_target},   {"rho", rho},
          {"q", q},                 {"lp_norm", lp_norm},     {"fourier_dual", fourier_dual},
          {"holder_bound", holder_bound}, {"constant", constant}, {"l2_norm", l2_norm},
          {"d_alpha_norm", d_alpha_norm}, {"rhs", rhs},        {"slack", slack},
          {"holds", holds}};
}

LpEmbeddingReport lp_embedding_check(const Signal& u, double alpha, double p_target, double rho) {
  if (!(alpha > 0.0 && alpha <= 0.5)) throw DomainError("alpha must lie in (0,1/2]");
  if (!(rho > 0.0)) throw DomainError("rho must be positive");
  const double p_max = alpha < 0.5 ? 2.0 / (1.0 - 2.0 * alpha) : std::numeric_limits<double>::infinity();
  if (!(p_target > 2.0 && p_target < p_max) || !std::isfinite(p_target)) throw DomainError("p_target out of range");
  LpEmbeddingReport r;
  r.alpha = alpha;
  r.p_target = p_target;
  r.rho = rho;
  r.q = 2.0 / (1.0 - 2.0 / p_target);
  const double p = p_target, pd = p / (p - 1.0), q = r.q;
  const auto& grid = u.grid();
  const double h = grid.spacing(), L = grid.period(), dxi = 2 * kPi / L;
  const auto n = static_cast<double>(grid.size());

  double acc = 0.0;
  for (Eigen::Index k = 0; k < u.values().rows(); ++k) acc += std::pow(u.values().row(k).norm(), p);
  r.lp_norm = std::pow(h * acc, 1 / p);

  // Continuous transform at torus frequencies: v^(xi_k) = L / sqrt(2 pi) * c_k, c_k = fft_unitary / sqrt(n).
  const Eigen::MatrixXcd c = fft(u.values()) * (L / std::sqrt(2 * kPi) / std::sqrt(n));
  double dual = 0.0, weighted = 0.0, wsum = 0.0, l2 = 0.0, da = 0.0;
  for (std::size_t k = 0; k < grid.size(); ++k) {
    const double a = c.row(static_cast<Eigen::Index>(k)).norm();
    const double xa = std::pow(std::abs(grid.frequency(k)), alpha);
    dual += std::pow(a, pd);
    weighted += (rho + xa) * (rho + xa) * a * a;
    wsum += std::pow(rho + xa, -q);
    l2 += a * a;
    da += xa * xa * a * a;
  }
  const double hy = std::pow(2 * kPi, 1 / p - 0.5);
  r.fourier_dual = hy * std::pow(dxi * dual, 1 / pd);
  r.holder_bound = hy * std::sqrt(dxi * weighted) * std::pow(dxi * wsum, 1 / q);
  r.l2_norm = std::sqrt(dxi * l2);
  r.d_alpha_norm = std::sqrt(dxi * da);
  r.constant = std::pow(2.0 / (q * alpha - 1.0), 1 / q) * std::pow(rho, 1.0 / (q * alpha) - 1.0);
  r.rhs = r.constant * (rho * r.l2_norm + r.d_alpha_norm);
  r.slack = r.rhs - r.lp_norm;
  r.holds = r.slack >= 0.0;
  return r;
}

}  // namespace mreg
