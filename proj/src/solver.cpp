#include "mreg/solver.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "mreg/errors.hpp"
#include "mreg/fft.hpp"
#include "mreg/fourier.hpp"
#include "mreg/fractional.hpp"
#include "mreg/gmres.hpp"
#include "mreg/quadrature.hpp"
#include "mreg/stabilized.hpp"

namespace mreg {

namespace {

using Eigen::Index;
using Eigen::MatrixXcd;
using Eigen::VectorXcd;

VectorXcd flatten(const Eigen::MatrixXcd& x) {
  const MatrixXcd t = x.transpose();
  return Eigen::Map<const VectorXcd>(t.data(), t.size());
}

MatrixXcd unflatten(const VectorXcd& v, Index n, Index d) {
  return Eigen::Map<const MatrixXcd>(v.data(), d, n).transpose();
}

double window_l2(const GelfandTriple& T, const Signal& u, double gamma) {
  const auto& g = u.grid();
  std::vector<double> vals;
  for (std::size_t k = g.window_first(); k <= g.window_last(); ++k)
    vals.push_back(std::pow(h_gamma_norm(T, u.at(k), gamma), 2));
  return std::sqrt(std::max(0.0, gregory_integral(vals, g.spacing())));
}

std::string history_tail(const std::vector<double>& h) {
  std::ostringstream os;
  os << "residual history tail:";
  for (std::size_t i = h.size() > 5 ? h.size() - 5 : 0; i < h.size(); ++i) os << ' ' << h[i];
  return os.str();
}

}  // namespace

void SolveConfig::validate() const {
  if (!(alpha >= 0.0 && alpha <= 0.5)) throw ConfigError("alpha must lie in [0, 1/2]");
  if (delta_stab && !(*delta_stab > 0.0 && *delta_stab < 1.0)) throw ConfigError("delta_stab must lie in (0,1)");
  if (rho && !(*rho >= 0.0)) throw ConfigError("rho must be nonnegative");
  if (!(delta0 > 0.0 && alpha + delta0 < 1.0)) throw ConfigError("delta0 must be positive with alpha + delta0 < 1");
  if (!(linear.tol > 0.0) || linear.max_iter <= 0 || linear.restart <= 0) throw ConfigError("linear solver tolerances must be positive");
  if (oracle.oversample == 0) throw ConfigError("oracle oversampling must be positive");
  if (junction_order < 0 || junction_order > 6) throw ConfigError("junction_order must lie in [0, 6]");
  if (!(tail_tol > 0.0)) throw ConfigError("tail_tol must be positive");
  if (measure_nodes < 16) throw ConfigError("measure_nodes must be at least 16");
}

Signal time_derivative(const Signal& u) {
  const auto& g = u.grid();
  Eigen::VectorXcd s(static_cast<Index>(g.size()));
  for (std::size_t k = 0; k < g.size(); ++k) s(static_cast<Index>(k)) = cplx(0.0, g.frequency(k));
  return apply_symbol(s, u);
}

CollocationSystem::CollocationSystem(SpaceTimeOperator op) : op_(std::move(op)) {
  const MatrixXcd Abar = op_.mean_block();
  Eigen::ComplexEigenSolver<MatrixXcd> es(Abar);
  bool ok = es.info() == Eigen::Success;
  if (ok) {
    V_ = es.eigenvectors();
    lambda_ = es.eigenvalues();
    Eigen::FullPivLU<MatrixXcd> lu(V_);
    ok = lu.isInvertible();
    if (ok) {
      Vinv_ = lu.inverse();
      ok = V_.norm() * Vinv_.norm() < 1e8;
    }
  }
  if (!ok) {
    V_.resize(0, 0);
    const auto& g = op_.grid();
    for (std::size_t k = 0; k < g.size(); ++k) {
      MatrixXcd M = Abar;
      M.diagonal().array() += cplx(0.0, g.frequency(k));
      lu_.emplace_back(M);
    }
  }
}

Signal CollocationSystem::apply(const Signal& u) const { return time_derivative(u) + op_.apply(u); }

Signal CollocationSystem::precondition(const Signal& r) const {
  const auto& g = grid();
  MatrixXcd x = fft(r.values());
  if (V_.size() > 0) {
    MatrixXcd z = x * Vinv_.transpose();
    for (std::size_t k = 0; k < g.size(); ++k) {
      const cplx ixi(0.0, g.frequency(k));
      z.row(static_cast<Index>(k)).array() /= (ixi + lambda_.array()).transpose();
    }
    x = z * V_.transpose();
  } else {
    for (std::size_t k = 0; k < g.size(); ++k) {
      const VectorXcd col = x.row(static_cast<Index>(k)).transpose();
      x.row(static_cast<Index>(k)) = lu_[k].solve(col).transpose();
    }
  }
  return r.with_values(ifft(x));
}

Eigen::MatrixXcd CollocationSystem::dense() const {
  const auto& g = grid();
  const auto n = static_cast<Index>(g.size()), d = op_.dim();
  // Spectral differentiation matrix, column l = derivative of the l-th unit impulse.
  MatrixXcd D = fft(MatrixXcd::Identity(n, n));
  for (Index k = 0; k < n; ++k) D.row(k) *= cplx(0.0, g.frequency(static_cast<std::size_t>(k)));
  D = ifft(D);
  MatrixXcd K = MatrixXcd::Zero(n * d, n * d);
  for (Index k = 0; k < n; ++k)
    for (Index l = 0; l < n; ++l)
      for (Index i = 0; i < d; ++i) K(k * d + i, l * d + i) = D(k, l);
  for (Index k = 0; k < n; ++k) K.block(k * d, k * d, d, d) += op_.block(static_cast<std::size_t>(k));
  return K;
}

CollocationSystem::Result CollocationSystem::solve(const Signal& f, const LinearSolverOptions& opt) const {
  if (f.grid().without_window() != grid().without_window() || f.dim() != op_.dim())
    throw StructuralError("right-hand side does not match the collocation system");
  const auto n = static_cast<Index>(grid().size()), d = op_.dim();
  const auto unknowns = static_cast<std::size_t>(n * d);
  const bool direct = opt.kind == LinearSolverKind::direct ||
                      (opt.kind == LinearSolverKind::automatic && unknowns <= opt.direct_limit);
  const VectorXcd b = flatten(f.values());
  Result res{Signal::zeros(f.grid(), d), 0.0, {}, 0, direct ? "direct" : "gmres"};
  if (direct) {
    if (unknowns > 4096) throw ConfigError("direct solve limited to 4096 unknowns");
    const MatrixXcd K = dense();
    const VectorXcd x = K.partialPivLu().solve(b);
    res.u = Signal(f.grid(), unflatten(x, n, d));
    const double bn = b.norm();
    res.residual = bn > 0 ? (K * x - b).norm() / bn : (K * x).norm();
    res.history = {res.residual};
  } else {
    const Signal proto = f;
    LinearMap A = [&](const VectorXcd& x) { return flatten(apply(proto.with_values(unflatten(x, n, d))).values()); };
    LinearMap M = [&](const VectorXcd& x) {
      return flatten(precondition(proto.with_values(unflatten(x, n, d))).values());
    };
    GmresOptions go{opt.tol, opt.max_iter, opt.restart};
    auto g = gmres(A, M, b, VectorXcd::Zero(b.size()), go);
    res.u = Signal(f.grid(), unflatten(g.x, n, d));
    res.residual = g.residual;
    res.history = std::move(g.history);
    res.iterations = g.iterations;
    if (!g.converged)
      throw SolverDivergence("GMRES did not reach the tolerance; " + history_tail(res.history), res.history);
  }
  return res;
}

nlohmann::json TraceReport::to_json() const {
  auto vec = [](const VectorXcd& v) {
    nlohmann::json a = nlohmann::json::array();
    for (Index i = 0; i < v.size(); ++i) a.push_back({v(i).real(), v(i).imag()});
    return a;
  };
  return {{"start_error", start_error}, {"u0_h2alpha", u0_h2alpha}, {"u0_sqrtA", u0_sqrtA},
          {"uT_sqrtA", uT_sqrtA},       {"u0", vec(u0)},             {"uT", vec(uT)}};
}

nlohmann::json StabilizedReport::to_json() const {
  return {{"alpha", alpha},       {"delta", delta},         {"rho", rho},   {"predicted", predicted},
          {"measured", measured}, {"doublings", doublings}, {"reached", reached}, {"method", method}};
}

nlohmann::json WeakSolution::to_json() const {
  nlohmann::json j;
  j["alpha"] = alpha;
  j["norms"] = norms;
  j["residual"] = residual;
  j["iterations"] = iterations;
  j["method"] = method;
  j["constants"] = constants.to_json();
  j["warnings"] = warnings;
  if (trace) j["trace"] = trace->to_json();
  if (stabilized) j["stabilized"] = stabilized->to_json();
  return j;
}

std::map<std::string, double> line_norms(const GelfandTriple& T, const Signal& u, const Signal& du, const Signal& Au,
                                         double alpha) {
  std::map<std::string, double> n;
  n["u.L2(H)"] = l2_norm(u);
  n["u.L2(V)"] = derivative_h_gamma_norm(T, u, 0.0, 1.0);
  n["u.Hhalf(H)"] = derivative_h_gamma_norm(T, u, 0.5, 0.0);
  if (alpha > 0) {
    n["u.Halpha(V)"] = derivative_h_gamma_norm(T, u, alpha, 1.0);
    n["u.Hhalf+alpha(H)"] = derivative_h_gamma_norm(T, u, 0.5 + alpha, 0.0);
  }
  const double a = l2_h_gamma_norm(T, du, 2 * alpha - 1), b = l2_h_gamma_norm(T, Au, 2 * alpha - 1);
  n["du.L2(H2a-1)"] = a;
  n["Au.L2(H2a-1)"] = b;
  n["MR"] = std::hypot(a, b);
  return n;
}

std::map<std::string, double> interval_norms(const GelfandTriple& T, const Signal& u, const Signal& du,
                                             const Signal& Au, double alpha) {
  if (!u.grid().has_window()) throw StructuralError("interval norms need a window");
  std::map<std::string, double> n;
  const double l2v = window_l2(T, u, 1.0);
  n["I.u.L2(H)"] = window_l2(T, u, 0.0);
  n["I.u.L2(V)"] = l2v;
  const double a = window_l2(T, du, 2 * alpha - 1), b = window_l2(T, Au, 2 * alpha - 1);
  n["I.du.L2(H2a-1)"] = a;
  n["I.Au.L2(H2a-1)"] = b;
  n["I.MR"] = std::hypot(a, b);
  n["I.du.L2(H)"] = window_l2(T, du, 0.0);
  SeminormOptions w;
  w.domain = SeminormDomain::window;
  const Signal uv = T.to_space(u, 1.0);
  n["I.u.Hhalf(V)"] = std::hypot(l2v, gagliardo_seminorm(uv, 0.5, 2, w));
  if (alpha > 0 && alpha < 0.5) n["I.u.Halpha(V)"] = std::hypot(l2v, gagliardo_seminorm(uv, alpha, 2, w));
  return n;
}

namespace {

struct LineContext {
  FormConstants constants;
  SpaceTimeOperator op;
  CollocationSystem::Result res;
};

LineContext line_solve(const NonAutonomousForm& F, const Signal& f, const SolveConfig& cfg) {
  cfg.validate();
  const TimeGrid grid = cfg.grid.without_window();
  if (f.grid().without_window() != grid) throw StructuralError("f must live on the configured grid");
  if (f.dim() != F.dim()) throw StructuralError("f dimension does not match the form");
  const FormConstants c = estimate_constants(F, grid);
  if (c.omega > 0.0 || !(c.eta > 0.0))
    throw DomainError("line solve needs a coercive form (eta > 0 without shift)");
  SpaceTimeOperator op = assemble_spacetime(F, grid);
  CollocationSystem K(op);
  auto res = K.solve(f.with_grid(grid), cfg.linear);
  res.u = res.u.with_grid(f.grid());
  return {c, std::move(op), std::move(res)};
}

WeakSolution package(const NonAutonomousForm& F, LineContext& ctx, double alpha) {
  WeakSolution s{ctx.res.u, time_derivative(ctx.res.u), ctx.op.apply(ctx.res.u.with_grid(ctx.op.grid())).with_grid(ctx.res.u.grid())};
  s.alpha = alpha;
  s.residual = ctx.res.residual;
  s.residual_history = ctx.res.history;
  s.iterations = ctx.res.iterations;
  s.method = ctx.res.method;
  s.constants = ctx.constants;
  s.norms = line_norms(F.triple(), s.u, s.du, s.Au, alpha);
  return s;
}

// The coercivity measurement is a property of the continuous operator; it runs on a coarser torus
// with the same period once the solve grid gets large.
SpaceTimeOperator measurement_operator(const NonAutonomousForm& F, const SolveConfig& cfg, const LineContext& ctx) {
  const TimeGrid& g = ctx.op.grid();
  if (g.size() <= cfg.measure_nodes) return ctx.op;
  std::size_t n = g.size();
  while (n > cfg.measure_nodes) n /= 2;
  return assemble_spacetime(F, TimeGrid(n, g.period()));
}

double default_delta(const SolveConfig& cfg, const FormConstants& c) {
  return cfg.delta_stab.value_or(c.eta / (c.M + 1.0));
}

}  // namespace

WeakSolution solve_line_weak(const NonAutonomousForm& F, const Signal& f, const SolveConfig& cfg) {
  auto ctx = line_solve(F, f, cfg);
  WeakSolution s = package(F, ctx, 0.0);
  if (cfg.measure_stabilized) {
    StabilizedReport r;
    r.delta = r.predicted = default_delta(cfg, ctx.constants);
    const auto m = measure_stabilized_coercivity(measurement_operator(F, cfg, ctx), F.triple(), {0.0, r.delta, 0.0});
    r.measured = m.value;
    r.method = m.method;
    r.reached = m.value >= r.predicted * (1 - 1e-9);
    s.stabilized = r;
    if (!r.reached) s.warnings.push_back("weak stabilized form below its predicted coercivity");
  }
  return s;
}

WeakSolution solve_line_regular(const NonAutonomousForm& F, const Signal& f, const SolveConfig& cfg) {
  if (!(cfg.alpha > 0.0 && cfg.alpha <= 0.5)) throw DomainError("regular solve needs alpha in (0, 1/2]");
  auto ctx = line_solve(F, f, cfg);
  WeakSolution s = package(F, ctx, cfg.alpha);
  // The hypothesis concerns the interval when there is one. Quadratic cost: at most 512 interval
  // nodes (2048 torus nodes without a window), by halving the grid.
  TimeGrid grid = cfg.grid;
  const std::size_t cap = grid.has_window() ? 512 : 2048;
  auto nodes = [](const TimeGrid& g) { return g.has_window() ? g.window_points() : g.size(); };
  while (nodes(grid) > cap && grid.size() % 2 == 0)
    grid = TimeGrid(grid.size() / 2, grid.period(),
                    grid.has_window() ? std::optional<Window>(grid.window()) : std::nullopt);

  // Time regularity of A1 at (alpha + delta0, 1/alpha), of A2 at (beta + delta0, 1/beta) when beta > 0.
  const double a = cfg.alpha, sidx = a + cfg.delta0;
  auto check = [&](const NonAutonomousForm& G, double s_idx, double p, const char* name) {
    const auto rep = form_regularity(G, s_idx, p, grid);
    if (rep.fine_slope >= 0.0 && rep.integral > 0.0)
      s.warnings.push_back(std::string("hypothesis unverifiable: ") + name + " regularity bands do not decay at s = " +
                           std::to_string(s_idx));
  };
  if (F.split()) {
    const auto& sp = *F.split();
    check(NonAutonomousForm(F.triple(), sp.part1), sidx, 1 / a, "A1");
    if (sp.beta > 0.0 && sp.beta + cfg.delta0 < 1.0)
      check(NonAutonomousForm(F.triple(), sp.part2), sp.beta + cfg.delta0, 1 / sp.beta, "A2");
  } else {
    check(F, sidx, 1 / a, "A");
  }

  if (cfg.measure_stabilized) {
    StabilizedReport r;
    r.alpha = a;
    r.delta = r.predicted = default_delta(cfg, ctx.constants);
    const auto& c = ctx.constants;
    const double gap = c.eta - c.eta2 > 0 ? c.eta - c.eta2 : c.eta;
    r.rho = cfg.rho.value_or(2 * c.M * (1 + r.delta) / gap);
    const SpaceTimeOperator mop = measurement_operator(F, cfg, ctx);
    for (;;) {
      const auto m = measure_stabilized_coercivity(mop, F.triple(), {a, r.delta, r.rho});
      r.measured = m.value;
      r.method = m.method;
      r.reached = m.value >= r.predicted / 2;
      if (r.reached || cfg.rho || r.doublings >= 20) break;
      r.rho *= 2;
      ++r.doublings;
    }
    s.stabilized = r;
    if (!r.reached) s.warnings.push_back("regular stabilized form did not reach delta/2");
  }
  return s;
}

nlohmann::json CausalityReport::to_json() const {
  return {{"t_cut", t_cut}, {"buffer", buffer}, {"tolerance", tolerance},
          {"ratio", ratio}, {"region_empty", region_empty}, {"holds", holds}};
}

CausalityReport causality_check(const NonAutonomousForm& F, const Signal& f, const WeakSolution& u, double t_cut,
                                double tolerance) {
  const auto& g = u.u.grid();
  const double fmax = max_abs(f);
  for (std::size_t k = 0; k < g.size(); ++k)
    if (g.time(k) < t_cut && f.at(k).cwiseAbs().maxCoeff() > 1e-12 * fmax)
      throw DomainError("f does not vanish before t_cut");
  CausalityReport r;
  r.t_cut = t_cut;
  r.tolerance = tolerance;
  const double eta = u.constants.eta > 0 ? u.constants.eta : estimate_constants(F, g.without_window()).eta;
  r.buffer = std::log(1 / tolerance) / (eta * F.triple().lambda_min());
  const double start = -g.period() / 2 + r.buffer;
  double pre = 0.0;
  std::size_t count = 0;
  for (std::size_t k = 0; k < g.size(); ++k) {
    const double t = g.time(k);
    if (t >= start && t < t_cut) {
      pre += u.u.at(k).squaredNorm();
      ++count;
    }
  }
  r.region_empty = count == 0;
  const double total = l2_norm(u.u);
  r.ratio = total > 0 ? std::sqrt(pre * g.spacing()) / total : 0.0;
  r.holds = r.ratio <= tolerance;
  return r;
}

nlohmann::json EnergyReport::to_json() const { return {{"lhs", lhs}, {"rhs", rhs}, {"relative_error", relative_error}}; }

EnergyReport energy_balance(const NonAutonomousForm& F, const Signal& f, const WeakSolution& sol,
                            const Eigen::VectorXcd& u0) {
  const auto& g = sol.u.grid();
  if (!g.has_window()) throw StructuralError("energy balance needs an interval window");
  std::vector<double> form, forcing;
  const std::size_t i0 = g.window_first(), i1 = g.window_last();
  for (std::size_t k = i0; k <= i1; ++k) {
    const VectorXcd uk = sol.u.at(k);
    form.push_back(uk.dot(F.at(g.time(k)) * uk).real());
    forcing.push_back(uk.dot(f.at(k)).real());
  }
  EnergyReport r;
  r.lhs = 0.5 * sol.u.at(i1).squaredNorm() + gregory_integral(form, g.spacing());
  r.rhs = 0.5 * u0.squaredNorm() + gregory_integral(forcing, g.spacing());
  const double scale = std::max({std::abs(r.lhs), std::abs(r.rhs), 1e-300});
  r.relative_error = std::abs(r.lhs - r.rhs) / scale;
  return r;
}

nlohmann::json InterpolationReport::to_json() const {
  return {{"alpha", alpha}, {"delta", delta}, {"theta", theta}, {"lhs", lhs},         {"first", first},
          {"second", second}, {"rhs", rhs},   {"slack", slack}, {"holds", holds}};
}

InterpolationReport interpolation_inequality_check(const Signal& u, double alpha, double delta,
                                                   const GelfandTriple& T) {
  if (!(alpha > 0.0 && alpha <= 0.5)) throw DomainError("interpolation needs alpha in (0, 1/2]");
  if (!(delta >= 0.0 && delta <= 1 - 2 * alpha + 1e-15)) throw DomainError("interpolation needs delta in [0, 1 - 2 alpha]");
  InterpolationReport r;
  r.alpha = alpha;
  r.delta = delta;
  r.theta = 2 * alpha / (1 - delta);
  r.lhs = derivative_h_gamma_norm(T, u, delta + 2 * alpha, 1 - 2 * delta - 2 * alpha);
  r.first = derivative_h_gamma_norm(T, u, (delta + 1) / 2 + alpha, -delta);
  r.second = derivative_h_gamma_norm(T, u, delta + alpha, 1 - 2 * delta);
  r.rhs = std::pow(r.first, r.theta) * std::pow(r.second, 1 - r.theta);
  r.slack = r.rhs - r.lhs;
  r.holds = r.slack >= -1e-9 * r.rhs;
  return r;
}

}  // namespace mreg
