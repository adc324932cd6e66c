#include <algorithm>
#include <cmath>

#include "mreg/errors.hpp"
#include "mreg/fractional.hpp"
#include "mreg/quadrature.hpp"
#include "mreg/solver.hpp"
#include "mreg/timestep.hpp"

namespace mreg {

namespace {

using Eigen::Index;
using Eigen::MatrixXcd;
using Eigen::VectorXcd;

double smooth_step_derivative(double x) {
  if (x <= 0.0 || x >= 1.0) return 0.0;
  const double s = smooth_step(x);
  return -s * (1 - s) * (1 / ((1 - x) * (1 - x)) + 1 / (x * x));
}

double factorial(int m) { return std::tgamma(m + 1.0); }

// One-sided stencil at an end of the window.
struct EndStencil {
  std::vector<std::size_t> idx;
  std::vector<std::vector<double>> w;  // w[order][j]
};

EndStencil end_stencil(const TimeGrid& g, bool left, int k) {
  const std::size_t i0 = g.window_first(), i1 = g.window_last();
  const std::size_t N = i1 - i0 + 1;
  const std::size_t q = std::min<std::size_t>(N, static_cast<std::size_t>(k) + 5);
  EndStencil s;
  std::vector<double> x;
  for (std::size_t j = 0; j < q; ++j) {
    s.idx.push_back(left ? i0 + j : i1 - j);
    x.push_back(g.time(s.idx.back()));
  }
  s.w = fornberg_weights(left ? g.time(i0) : g.time(i1), x, std::min<int>(k, static_cast<int>(q) - 1));
  return s;
}

template <class M, class Get>
std::vector<M> derivatives(const EndStencil& s, Get get, int k) {
  std::vector<M> out;
  for (int m = 0; m <= k; ++m) {
    if (static_cast<std::size_t>(m) >= s.w.size()) {
      out.push_back(M(get(s.idx[0]) * 0.0));
      continue;
    }
    M acc = get(s.idx[0]) * s.w[static_cast<std::size_t>(m)][0];
    for (std::size_t j = 1; j < s.idx.size(); ++j) acc += get(s.idx[j]) * s.w[static_cast<std::size_t>(m)][j];
    out.push_back(acc);
  }
  return out;
}

// Largest l in [lmin, lmax] with max_{m>=2} n_m l^m/m! <= max(n_0, n_1 l).
double growth_limited_length(const std::vector<double>& n, double lmin, double lmax) {
  auto ok = [&](double l) {
    const double ref = std::max(n[0], n.size() > 1 ? n[1] * l : 0.0);
    for (std::size_t m = 2; m < n.size(); ++m)
      if (n[m] * std::pow(l, static_cast<double>(m)) / factorial(static_cast<int>(m)) > ref) return false;
    return true;
  };
  double l = lmax;
  while (l > lmin && !ok(l)) l *= 0.9;
  return std::max(l, lmin);
}

template <class M>
M taylor(const std::vector<M>& jets, double s, int from, int to) {
  M acc = jets[0] * 0.0;
  for (int m = from; m <= to; ++m) acc += jets[static_cast<std::size_t>(m)] * (std::pow(s, m) / factorial(m));
  return acc;
}

struct LineProblem {
  NonAutonomousForm form;
  Signal f;
  int right_order = 0;
  double left_length = 0, right_length = 0;
};

LineProblem build_line_problem(const NonAutonomousForm& F, const Signal& f, const VectorXcd& u0, double omega,
                               const TimeGrid& grid, const SolveConfig& cfg) {
  const double h = grid.spacing(), L = grid.period();
  const std::size_t i0 = grid.window_first(), i1 = grid.window_last();
  const double a = grid.window().a, b = grid.window().b;
  const Index d = F.dim();
  const int k = cfg.junction_order;
  const MatrixXcd I = MatrixXcd::Identity(d, d);
  const double left_room = a + L / 2, right_room = L / 2 - b;
  // Cutoffs narrower than about a hundred nodes cost spectral accuracy at the junctions.
  const double lmin = std::min({128 * h, 0.5 * left_room, 0.25 * right_room});
  if (lmin < 16 * h) throw StructuralError("insufficient padding around the interval");

  auto At = [&](std::size_t i) -> MatrixXcd { return F.at(grid.time(i)) + omega * I; };
  auto ft = [&](std::size_t i) -> VectorXcd { return std::exp(-omega * (grid.time(i) - a)) * f.at(i); };

  // Left lift: Taylor jets of the solution at a, cut off smoothly to the left.
  const auto sl = end_stencil(grid, true, k);
  const auto Ad = derivatives<MatrixXcd>(sl, At, k);
  const auto fd = derivatives<VectorXcd>(sl, ft, k);
  std::vector<VectorXcd> u(static_cast<std::size_t>(k) + 2);
  u[0] = u0;
  for (int m = 0; m <= k; ++m) {
    VectorXcd acc = fd[static_cast<std::size_t>(m)];
    for (int i = 0; i <= m; ++i)
      acc -= std::tgamma(m + 1.0) / (std::tgamma(i + 1.0) * std::tgamma(m - i + 1.0)) * (Ad[static_cast<std::size_t>(i)] * u[static_cast<std::size_t>(m - i)]);
    u[static_cast<std::size_t>(m) + 1] = acc;
  }
  std::vector<double> un;
  for (const auto& x : u) un.push_back(x.norm());
  const double ll = growth_limited_length(un, lmin, 0.5 * left_room);

  // Left coefficient: frozen at a (constant mode) or the window average (weak theory).
  MatrixXcd AL = At(i0);
  double gL = 0.0;
  const auto& sep = F.separable_structure();
  if (cfg.alpha == 0.0) {
    AL.setZero();
    for (std::size_t i = i0; i <= i1; ++i) AL += (i == i0 || i == i1 ? 0.5 : 1.0) * At(i);
    AL *= h / (b - a);
    if (sep) {
      for (std::size_t i = i0; i <= i1; ++i) gL += (i == i0 || i == i1 ? 0.5 : 1.0) * sep->profile(grid.time(i));
      gL *= h / (b - a);
    }
  } else if (sep) {
    gL = sep->profile(a);
  }

  // Right coefficient: Taylor blend at b, order lowered until the blend stays coercive and bounded.
  const auto sr = end_stencil(grid, false, k);
  const auto Ar = derivatives<MatrixXcd>(sr, At, k);
  const auto fr = derivatives<VectorXcd>(sr, ft, k);
  const GelfandTriple& T = F.triple();
  double eta_min = 1e300, M_max = 0.0;
  for (std::size_t i = i0; i <= i1; ++i) {
    const auto m = measure_form(T, At(i));
    eta_min = std::min(eta_min, m.eta);
    M_max = std::max(M_max, m.M);
  }
  int kA = k;
  double lA = lmin;
  for (; kA > 0; --kA) {
    std::vector<double> an;
    for (int m = 0; m <= kA; ++m) an.push_back(Ar[static_cast<std::size_t>(m)].norm());
    lA = growth_limited_length(an, lmin, 0.25 * right_room);
    bool good = true;
    for (int j = 1; j <= 64 && good; ++j) {
      const double s = lA * j / 64.0;
      const MatrixXcd Aj = Ar[0] + smooth_step(s / lA) * taylor(Ar, s, 1, kA);
      const auto m = measure_form(T, Aj);
      good = m.eta >= 0.5 * eta_min && m.M <= 2 * M_max;
    }
    if (good) break;
  }
  std::vector<double> fn;
  for (const auto& x : fr) fn.push_back(x.norm());
  const double lf = growth_limited_length(fn, lmin, 0.25 * right_room);

  const double tol = 1e-9 * h;
  auto in_window = [=](double t) { return t >= a - tol && t <= b + tol; };
  NonAutonomousForm line = [&]() {
    if (sep) {
      // Same extension on the scalar profile keeps the A0 + g A1 structure.
      const auto gr = derivatives<double>(sr, [&](std::size_t i) { return sep->profile(grid.time(i)); }, k);
      const ScalarProfile g = sep->profile;
      const int order = kA;
      ScalarProfile ge = [=](double t) {
        if (t < a - tol) return gL;
        if (in_window(t)) return g(t);
        const double s = t - b;
        double acc = 0.0;
        for (int m = 1; m <= order; ++m) acc += gr[static_cast<std::size_t>(m)] * std::pow(s, m) / factorial(m);
        return gr[0] + smooth_step(s / lA) * acc;
      };
      return NonAutonomousForm::separable(T, sep->base + omega * I, sep->direction, ge, {{"kind", "ivp_line"}});
    }
    const MatrixSampler S = F.sampler();
    const int order = kA;
    MatrixSampler ext = [=](double t) -> MatrixXcd {
      if (t < a - tol) return AL;
      if (in_window(t)) return S(t) + omega * I;
      const double s = t - b;
      return Ar[0] + smooth_step(s / lA) * taylor(Ar, s, 1, order);
    };
    return NonAutonomousForm(T, ext, {{"kind", "ivp_line"}});
  }();

  MatrixXcd fl = MatrixXcd::Zero(static_cast<Index>(grid.size()), d);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double t = grid.time(i);
    VectorXcd v;
    if (in_window(t)) {
      v = ft(i);
    } else if (t < a) {
      const double s = t - a;
      const double chi = smooth_step(-s / ll), dchi = -smooth_step_derivative(-s / ll) / ll;
      const VectorXcd P = taylor(u, s, 0, k + 1);
      const VectorXcd dP = [&] {
        VectorXcd acc = VectorXcd::Zero(d);
        for (int m = 1; m <= k + 1; ++m) acc += u[static_cast<std::size_t>(m)] * (std::pow(s, m - 1) / factorial(m - 1));
        return acc;
      }();
      const VectorXcd w = chi * P;
      v = dchi * P + chi * dP + AL * w;
    } else {
      const double s = t - b;
      v = smooth_step(s / lf) * taylor(fr, s, 0, k);
    }
    fl.row(static_cast<Index>(i)) = v.transpose();
  }
  return {line, Signal(grid, fl), kA, ll, lA};
}

double tail_ratio(const Signal& v) {
  const auto& g = v.grid();
  const double L = g.period(), edge = L / 32;
  double tail = 0.0, peak = 0.0;
  for (std::size_t k = 0; k < g.size(); ++k) {
    const double x = v.at(k).norm(), t = g.time(k);
    peak = std::max(peak, x);
    if (t < -L / 2 + edge || t > L / 2 - edge) tail = std::max(tail, x);
  }
  return peak > 0 ? tail / peak : 0.0;
}

}  // namespace

TimeGrid ivp_grid(double T, std::size_t n, const NonAutonomousForm& F, double tail_tol) {
  if (!(T > 0) || n < 8) throw DomainError("ivp_grid needs T > 0 and at least 8 interval points");
  const double h = T / static_cast<double>(n);
  const TimeGrid probe(4 * n, 4 * T, Window{0.0, T});
  const FormConstants c = estimate_constants(F, probe);
  // The lift is cut off inside the left pad and the free decay runs across both pads.
  const double pad = std::max(T, std::log(1 / tail_tol) / (c.eta * F.triple().lambda_min()));
  std::size_t N = 2;
  while (static_cast<double>(N) * h < 2 * (T + pad)) N *= 2;
  return TimeGrid(N, static_cast<double>(N) * h, Window{0.0, T});
}

WeakSolution solve_ivp(const NonAutonomousForm& F, const Signal& f, const VectorXcd& u0, const SolveConfig& cfg) {
  cfg.validate();
  if (!cfg.grid.has_window()) throw StructuralError("solve_ivp needs a grid with an interval window");
  if (f.grid().without_window() != cfg.grid.without_window() || f.dim() != F.dim())
    throw StructuralError("f must live on the configured grid");
  if (u0.size() != F.dim()) throw StructuralError("u0 dimension does not match the form");
  if (!u0.allFinite()) throw DataError("u0 has non-finite entries");

  const FormConstants c = estimate_constants(F, cfg.grid);
  const double omega = c.omega;
  TimeGrid grid = cfg.grid;
  Signal fg = f.with_grid(grid);
  for (int attempt = 0; attempt < 2; ++attempt) {
    const double a = grid.window().a;
    LineProblem P = build_line_problem(F, fg, u0, omega, grid, cfg);
    SolveConfig lc = cfg;
    lc.grid = grid;
    WeakSolution v = cfg.alpha > 0 ? solve_line_regular(P.form, P.f, lc) : solve_line_weak(P.form, P.f, lc);
    const double tail = tail_ratio(v.u);
    if (tail > cfg.tail_tol) {
      if (attempt == 0) {
        // Enlarge the torus once: twice the period at the same spacing.
        const TimeGrid bigger(2 * grid.size(), 2 * grid.period(), grid.window());
        MatrixXcd fv = MatrixXcd::Zero(static_cast<Index>(bigger.size()), F.dim());
        const std::size_t off = bigger.window_first() - grid.window_first();
        for (std::size_t k = grid.window_first(); k <= grid.window_last(); ++k)
          fv.row(static_cast<Index>(k + off)) = fg.values().row(static_cast<Index>(k));
        grid = bigger;
        fg = Signal(grid, fv);
        continue;
      }
      throw NumericalError("periodic tail mass " + std::to_string(tail) + " above tolerance after enlarging the torus");
    }

    // Undo the rescaling v = e^{-omega (t-a)} u.
    const std::size_t n = grid.size();
    MatrixXcd uv(static_cast<Index>(n), F.dim()), duv(uv.rows(), uv.cols()), Auv(uv.rows(), uv.cols());
    for (std::size_t k = 0; k < n; ++k) {
      const double e = std::exp(omega * (grid.time(k) - a));
      const auto r = static_cast<Index>(k);
      uv.row(r) = e * v.u.values().row(r);
      duv.row(r) = omega * uv.row(r) + e * v.du.values().row(r);
      Auv.row(r) = e * v.Au.values().row(r) - omega * uv.row(r);
    }
    WeakSolution s{Signal(grid, uv), Signal(grid, duv), Signal(grid, Auv)};
    s.alpha = cfg.alpha;
    s.residual = v.residual;
    s.residual_history = v.residual_history;
    s.iterations = v.iterations;
    s.method = v.method;
    s.constants = c;
    s.stabilized = v.stabilized;
    s.warnings = v.warnings;
    s.norms = interval_norms(F.triple(), s.u, s.du, s.Au, cfg.alpha);
    for (const auto& [key, val] : v.norms) s.norms["line." + key] = val;
    s.norms["tail_ratio"] = tail;
    s.norms["right_order"] = P.right_order;

    TraceReport tr;
    tr.u0 = u0;
    tr.uT = s.u.at(grid.window_last());
    tr.start_error = (s.u.at(grid.window_first()) - u0).norm();
    tr.u0_h2alpha = h_gamma_norm(F.triple(), u0, 2 * cfg.alpha);
    const MatrixXcd Id = MatrixXcd::Identity(F.dim(), F.dim());
    tr.u0_sqrtA = FractionalPower(F.at(a) + omega * Id).apply(0.5, u0).norm();
    tr.uT_sqrtA = FractionalPower(F.at(grid.window().b) + omega * Id).apply(0.5, tr.uT).norm();
    s.trace = tr;

    if (cfg.oracle.enabled) {
      const Forcing forig = window_interpolant(fg);
      const std::size_t steps = (grid.window_points() - 1) * cfg.oracle.oversample;
      const auto cn = crank_nicolson_richardson(F.sampler(), forig, u0, a, grid.window().b, steps);
      double diff = 0.0, peak = 0.0;
      for (std::size_t k = grid.window_first(); k <= grid.window_last(); ++k) {
        const auto& ref = cn[(k - grid.window_first()) * cfg.oracle.oversample];
        diff = std::max(diff, (s.u.at(k) - ref).norm());
        peak = std::max(peak, ref.norm());
      }
      s.norms["oracle.max_rel_diff"] = peak > 0 ? diff / peak : diff;
    }
    return s;
  }
  throw NumericalError("unreachable");
}

}  // namespace mreg
