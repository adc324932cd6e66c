#include <gtest/gtest.h>

#include "mreg/errors.hpp"
#include "mreg/fft.hpp"
#include "mreg/fourier.hpp"
#include "mreg/fractional.hpp"
#include "mreg/random_models.hpp"
#include "mreg/solver.hpp"
#include "mreg/stabilized.hpp"
#include "mreg/timestep.hpp"
#include "support/form_families.hpp"
#include "support/test_util.hpp"

using namespace mreg;
using Eigen::MatrixXcd;
using Eigen::VectorXcd;

namespace {

// Coefficients periodic on the torus so the line problem has no wrap-around kink.
NonAutonomousForm torus_family(const GelfandTriple& T, Rng& rng, double L, double eta = 1.0, double M = 4.0) {
  return testkit::random_smooth_family(T, rng, eta, M, 0.3, 3, L / 2);
}

Signal manufactured_forcing(const NonAutonomousForm& F, const Signal& u) {
  return time_derivative(u) + assemble_spacetime(F, u.grid()).apply(u);
}

double max_rel(const Signal& a, const Signal& b) {
  return max_abs(a - b) / max_abs(b);
}

// f = smooth cutoff at t_cut times a packet, zero before t_cut and near the torus end.
Signal forcing_after(const TimeGrid& g, double t_cut, Eigen::Index d, Rng& rng) {
  const Signal p = testkit::random_packet(g, d, rng, 1.0, 3.0);
  MatrixXcd v = p.values();
  for (std::size_t k = 0; k < g.size(); ++k) {
    const double t = g.time(k);
    v.row(static_cast<Eigen::Index>(k)) *= smooth_step((t_cut + 0.5 - t) / 0.5) * smooth_step((t - t_cut - 5.5) / 0.5);
  }
  return p.with_values(v);
}

}  // namespace

TEST(Line, ScalarFourierExactness) {
  const TimeGrid g(256, 20.0);
  const GelfandTriple T = GelfandTriple::identity(1);
  const double lambda = 2.5;
  const auto F = NonAutonomousForm::autonomous(T, MatrixXcd::Constant(1, 1, lambda));
  Rng rng(11);
  const Signal f = testkit::random_trig(g, 1, rng, 40);
  SolveConfig cfg(g);
  cfg.linear.kind = LinearSolverKind::iterative;
  cfg.linear.tol = 1e-14;
  const auto sol = solve_line_weak(F, f, cfg);
  const MatrixXcd fh = fft(f.values()), uh = fft(sol.u.values());
  double worst = 0.0;
  for (std::size_t k = 0; k < g.size(); ++k) {
    const cplx expect = fh(static_cast<Eigen::Index>(k)) / cplx(lambda, g.frequency(k));
    worst = std::max(worst, std::abs(uh(static_cast<Eigen::Index>(k)) - expect));
  }
  EXPECT_LT(worst, 1e-12 * fh.cwiseAbs().maxCoeff());
}

TEST(Line, ManufacturedSolutionAndOracle) {
  Rng rng(12);
  const TimeGrid g(1024, 16.0);
  for (int family = 0; family < 2; ++family) {
    const GelfandTriple T(random_spd(2, rng, 20));
    const auto F = torus_family(T, rng, g.period());
    const Signal ustar = testkit::random_trig(g, 2, rng, 12);
    const Signal f = manufactured_forcing(F, ustar);
    SolveConfig cfg(g);
    const auto sol = solve_line_weak(F, f, cfg);
    EXPECT_EQ(sol.method, "gmres");
    EXPECT_LT(l2_h_gamma_norm(T, sol.u - ustar, 1.0) / l2_h_gamma_norm(T, ustar, 1.0), 1e-8);

    const Signal cn = crank_nicolson_periodic(F.sampler(), spectral_interpolant(f), g, 2, 4, true);
    EXPECT_LT(max_rel(cn, sol.u), 1e-5);
  }
}

TEST(Line, DirectAndIterativeAgree) {
  Rng rng(13);
  const TimeGrid g(256, 12.0);
  const GelfandTriple T(random_spd(3, rng, 50));
  const auto F = torus_family(T, rng, g.period(), 1.0, 10.0);
  const Signal f = testkit::random_packet(g, 3, rng);
  SolveConfig cfg(g);
  cfg.measure_stabilized = false;
  cfg.linear.kind = LinearSolverKind::direct;
  const auto a = solve_line_weak(F, f, cfg);
  cfg.linear.kind = LinearSolverKind::iterative;
  const auto b = solve_line_weak(F, f, cfg);
  EXPECT_EQ(a.method, "direct");
  EXPECT_EQ(b.method, "gmres");
  EXPECT_LT(max_rel(a.u, b.u), 1e-9);
  EXPECT_LT(b.residual, 1e-10);
}

TEST(Line, EnergyBoundAndEmbedding) {
  Rng rng(14);
  const TimeGrid g(512, 16.0);
  const GelfandTriple T(random_spd(3, rng, 30));
  const auto F = torus_family(T, rng, g.period(), 0.5, 5.0);
  const FormConstants c = estimate_constants(F, g);
  SolveConfig cfg(g);
  cfg.measure_stabilized = false;
  for (int i = 0; i < 20; ++i) {
    const Signal f = testkit::random_packet(g, 3, rng);
    const auto sol = solve_line_weak(F, f, cfg);
    const double lhs = c.eta * std::pow(l2_h_gamma_norm(T, sol.u, 1.0), 2);
    EXPECT_LE(lhs, l2_inner(sol.u, f).real() * (1 + 1e-9));
    // MR_0 into V_0: ||d^{1/2} u||^2 <= ||d u||_{L2(V')} ||u||_{L2(V)}.
    const double half = derivative_h_gamma_norm(T, sol.u, 0.5, 0.0);
    EXPECT_LE(half * half, derivative_h_gamma_norm(T, sol.u, 1.0, -1.0) * l2_h_gamma_norm(T, sol.u, 1.0) * (1 + 1e-9));
  }
}

TEST(Line, WeakStabilizedCoercivity) {
  Rng rng(15);
  const TimeGrid g(128, 8.0);
  for (int family = 0; family < 4; ++family) {
    const GelfandTriple T(random_spd(3, rng, 100));
    const double ratio = uniform(rng, 1.0, 50.0);
    const auto F = torus_family(T, rng, g.period(), 1.0, ratio);
    const FormConstants c = estimate_constants(F, g);
    const double delta = c.eta / (c.M + 1);
    const auto op = assemble_spacetime(F, g);
    for (int i = 0; i < 50; ++i) {
      const Signal v = testkit::random_trig(g, 3, rng, 30);
      const double norm = stabilized_norm_sq(T, v, 0.0);
      const double E = stabilized_form(op, v, v, {0.0, delta, 0.0}).real();
      EXPECT_GE(E, delta * norm - 1e-9 * norm);
    }
  }
}

TEST(Line, StabilizerSymbolBounds) {
  const TimeGrid g(64, 5.0);
  for (double delta : {0.01, 0.3, 0.9}) {
    const VectorXcd s = stabilizer(delta).on(g);
    for (Eigen::Index k = 0; k < s.size(); ++k) {
      EXPECT_GE(std::abs(s(k)), 1 - delta);
      EXPECT_LE(std::abs(s(k)), 1 + delta + 1e-15);
    }
  }
}

TEST(Line, MaximalRegularitySelfAdjoint) {
  Rng rng(16);
  const TimeGrid g(512, 16.0);
  const GelfandTriple T(random_spd(4, rng, 100));
  const auto F = NonAutonomousForm::autonomous(T, T.riesz_map().cast<cplx>());
  SolveConfig cfg(g);
  cfg.alpha = 0.5;
  for (int i = 0; i < 5; ++i) {
    const Signal f = testkit::random_packet(g, 4, rng);
    const auto sol = solve_line_regular(F, f, cfg);
    EXPECT_LE(l2_norm(sol.du), l2_norm(f) * (1 + 1e-9));
    EXPECT_TRUE(sol.warnings.empty());
    ASSERT_TRUE(sol.stabilized);
    EXPECT_TRUE(sol.stabilized->reached);
  }
}

TEST(Line, RefinementStabilityOfMRNorm) {
  Rng rng(17);
  const GelfandTriple T(random_spd(2, rng, 10));
  const double L = 16.0;
  const auto F = torus_family(T, rng, L);
  auto forcing = [](double t) {
    VectorXcd v(2);
    v << std::exp(-t * t) * std::cos(3 * t), std::exp(-(t - 1) * (t - 1));
    return v;
  };
  std::vector<double> mr;
  for (std::size_t n : {256, 512, 1024}) {
    const TimeGrid g(n, L);
    SolveConfig cfg(g);
    cfg.alpha = 0.5;
    cfg.measure_stabilized = false;
    mr.push_back(solve_line_regular(F, Signal::sample(g, 2, forcing), cfg).norms.at("MR"));
  }
  const auto [lo, hi] = std::minmax_element(mr.begin(), mr.end());
  EXPECT_LE(*hi / *lo, 1.2);
}

TEST(Line, ZeroForcing) {
  Rng rng(18);
  const TimeGrid g(128, 8.0);
  const GelfandTriple T(random_spd(2, rng, 10));
  const auto F = torus_family(T, rng, g.period());
  SolveConfig cfg(g);
  cfg.alpha = 0.25;
  const auto sol = solve_line_regular(F, Signal::zeros(g, 2), cfg);
  EXPECT_EQ(max_abs(sol.u), 0.0);
  for (const auto& [key, value] : sol.norms) EXPECT_EQ(value, 0.0) << key;
}

TEST(Line, ConfigAndDomainErrors) {
  const TimeGrid g(64, 8.0);
  const GelfandTriple T = GelfandTriple::identity(1);
  SolveConfig cfg(g);
  cfg.delta_stab = 1.5;
  EXPECT_THROW(cfg.validate(), ConfigError);
  SolveConfig ok(g);
  const auto neg = NonAutonomousForm::autonomous(T, MatrixXcd::Constant(1, 1, -1.0));
  EXPECT_THROW(solve_line_weak(neg, Signal::zeros(g, 1), ok), DomainError);
  ok.alpha = 0.0;
  const auto pos = NonAutonomousForm::autonomous(T, MatrixXcd::Constant(1, 1, 1.0));
  EXPECT_THROW(solve_line_regular(pos, Signal::zeros(g, 1), ok), DomainError);
}

TEST(Causality, PreSupportMass) {
  Rng rng(19);
  const TimeGrid g(2048, 48.0);
  for (int i = 0; i < 5; ++i) {
    const GelfandTriple T(random_spd(2, rng, 10));
    const auto F = torus_family(T, rng, g.period());
    const Signal f = forcing_after(g, 0.0, 2, rng);
    SolveConfig cfg(g);
    cfg.measure_stabilized = false;
    const auto sol = solve_line_weak(F, f, cfg);
    const auto r = causality_check(F, f, sol, 0.0);
    EXPECT_FALSE(r.region_empty);
    EXPECT_TRUE(r.holds) << r.ratio;
    EXPECT_LE(r.ratio, 1e-6);
  }
}

TEST(Causality, ZeroForcingAndPreconditionError) {
  Rng rng(20);
  const TimeGrid g(256, 48.0);
  const GelfandTriple T(random_spd(2, rng, 10));
  const auto F = torus_family(T, rng, g.period());
  SolveConfig cfg(g);
  cfg.measure_stabilized = false;
  const auto zero = solve_line_weak(F, Signal::zeros(g, 2), cfg);
  EXPECT_EQ(max_abs(zero.u), 0.0);
  const Signal f = forcing_after(g, -3.0, 2, rng);
  const auto sol = solve_line_weak(F, f, cfg);
  EXPECT_THROW(causality_check(F, f, sol, 0.0), DomainError);
}

TEST(Causality, TranslationInvariance) {
  Rng rng(21);
  const TimeGrid g(512, 32.0);
  const GelfandTriple T(random_spd(3, rng, 10));
  const auto F = NonAutonomousForm::autonomous(T, random_coercive_matrix(T, 1.0, 5.0, rng));
  const Signal f = testkit::random_packet(g, 3, rng);
  const Eigen::Index shift = 37;
  MatrixXcd moved(f.values().rows(), 3);
  const Eigen::Index n = moved.rows();
  for (Eigen::Index k = 0; k < n; ++k) moved.row((k + shift) % n) = f.values().row(k);
  SolveConfig cfg(g);
  cfg.measure_stabilized = false;
  const auto a = solve_line_weak(F, f, cfg);
  const auto b = solve_line_weak(F, f.with_values(moved), cfg);
  double worst = 0.0;
  for (Eigen::Index k = 0; k < n; ++k)
    worst = std::max(worst, (b.u.values().row((k + shift) % n) - a.u.values().row(k)).norm());
  EXPECT_LT(worst, 1e-9 * max_abs(a.u));
}

TEST(Ivp, EigenvectorDecay) {
  Rng rng(22);
  const GelfandTriple T(random_spd(3, rng, 10));
  const MatrixXcd A = T.riesz_map().cast<cplx>();
  const auto F = NonAutonomousForm::autonomous(T, A);
  Eigen::SelfAdjointEigenSolver<MatrixXcd> es(A);
  const TimeGrid g = ivp_grid(1.0, 1024, F);
  SolveConfig cfg(g);
  cfg.measure_stabilized = false;
  for (Eigen::Index j = 0; j < 3; ++j) {
    const VectorXcd u0 = es.eigenvectors().col(j);
    const double lambda = es.eigenvalues()(j);
    const auto sol = solve_ivp(F, Signal::zeros(g, 3), u0, cfg);
    double worst = 0.0;
    for (std::size_t k = g.window_first(); k <= g.window_last(); ++k)
      worst = std::max(worst, (sol.u.at(k) - std::exp(-lambda * g.time(k)) * u0).norm());
    EXPECT_LT(worst, 1e-6);
  }
}

TEST(Ivp, EnergyIdentityTraceAndOracle) {
  Rng rng(23);
  for (int i = 0; i < 3; ++i) {
    const GelfandTriple T(random_spd(2, rng, 10));
    const auto F = testkit::random_smooth_family(T, rng, 1.0, 4.0, 0.3, 3, 1.0);
    const TimeGrid g = ivp_grid(1.0, 1024, F);
    const Signal f = testkit::random_on_window(g, 2, rng);
    const VectorXcd u0 = random_complex(2, 1, rng).col(0);
    SolveConfig cfg(g);
    cfg.alpha = i == 0 ? 0.0 : 0.5;
    cfg.oracle.enabled = true;
    const auto sol = solve_ivp(F, f, u0, cfg);
    ASSERT_TRUE(sol.trace);
    EXPECT_LT(sol.trace->start_error, 1e-8);
    EXPECT_TRUE(std::isfinite(sol.trace->uT_sqrtA));
    EXPECT_LT(energy_balance(F, f, sol, u0).relative_error, 1e-6);
    EXPECT_LT(sol.norms.at("oracle.max_rel_diff"), 1e-5);
  }
}

TEST(Ivp, QuasiCoerciveRescaling) {
  // u' - u = 0: growth e^t, only reachable through the e^{-omega t} rescaling.
  const GelfandTriple T = GelfandTriple::identity(1);
  const auto F = NonAutonomousForm::autonomous(T, MatrixXcd::Constant(1, 1, -1.0));
  const TimeGrid g = ivp_grid(1.0, 512, F.with_sampler([](double) { return MatrixXcd::Constant(1, 1, 1.0); }, {}));
  SolveConfig cfg(g);
  cfg.measure_stabilized = false;
  const VectorXcd u0 = VectorXcd::Constant(1, 1.0);
  const auto sol = solve_ivp(F, Signal::zeros(g, 1), u0, cfg);
  EXPECT_GT(sol.constants.omega, 1.0);
  double worst = 0.0;
  for (std::size_t k = g.window_first(); k <= g.window_last(); ++k)
    worst = std::max(worst, std::abs(sol.u.at(k)(0) - std::exp(g.time(k))));
  EXPECT_LT(worst, 1e-6);
}

TEST(Ivp, RejectsBadInput) {
  const GelfandTriple T = GelfandTriple::identity(2);
  const auto F = NonAutonomousForm::autonomous(T, MatrixXcd::Identity(2, 2));
  const TimeGrid g = ivp_grid(1.0, 64, F);
  SolveConfig cfg(g);
  VectorXcd u0 = VectorXcd::Zero(2);
  u0(1) = std::numeric_limits<double>::quiet_NaN();
  EXPECT_THROW(solve_ivp(F, Signal::zeros(g, 2), u0, cfg), DataError);
  EXPECT_THROW(solve_ivp(F, Signal::zeros(g, 2), VectorXcd::Zero(3), cfg), StructuralError);
  SolveConfig line(g.without_window());
  EXPECT_THROW(solve_ivp(F, Signal::zeros(g, 2), VectorXcd::Zero(2), line), StructuralError);
}

TEST(Interpolation, EqualityOnSingleMode) {
  Rng rng(24);
  const TimeGrid g(128, 10.0);
  const GelfandTriple T(random_spd(4, rng, 50));
  const VectorXcd e = T.eigenvectors().col(2).cast<cplx>();
  const double xi = g.frequency(5);
  const Signal u = Signal::sample(g, 4, [&](double t) -> VectorXcd { return std::polar(1.0, xi * t) * e; });
  for (double a : {0.2, 0.35}) {
    for (double d : {0.0, 0.25}) {
      const auto r = interpolation_inequality_check(u, a, d, T);
      EXPECT_NEAR(r.lhs, r.rhs, 1e-10 * r.rhs);
    }
  }
  const auto half = interpolation_inequality_check(u, 0.5, 0.0, T);
  EXPECT_NEAR(half.lhs, half.rhs, 1e-12 * half.rhs);
}

TEST(Interpolation, RandomInstancesAndDomain) {
  Rng rng(25);
  const TimeGrid g(128, 10.0);
  for (int i = 0; i < 60; ++i) {
    const GelfandTriple T(random_spd(1 + i % 6, rng, 1e3));
    const Signal u = testkit::random_trig(g, T.dim(), rng, 20);
    for (auto [a, d] : {std::pair{0.2, 0.0}, {0.2, 0.25}, {0.5, 0.0}}) {
      const auto r = interpolation_inequality_check(u, a, d, T);
      EXPECT_TRUE(r.holds) << r.slack;
    }
  }
  const GelfandTriple T = GelfandTriple::identity(2);
  const Signal u = testkit::random_trig(g, 2, rng);
  EXPECT_THROW(interpolation_inequality_check(u, 0.5, 0.25, T), DomainError);
  EXPECT_THROW(interpolation_inequality_check(u, 0.2, -0.1, T), DomainError);
  EXPECT_THROW(interpolation_inequality_check(u, 0.0, 0.0, T), DomainError);
}
