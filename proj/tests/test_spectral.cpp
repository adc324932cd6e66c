#include <gtest/gtest.h>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <cmath>
#include <sstream>

#include "mreg/errors.hpp"
#include "mreg/fft.hpp"
#include "mreg/fourier.hpp"
#include "mreg/fractional.hpp"
#include "test_util.hpp"

using namespace mreg;
using mreg::testkit::kPi;

namespace {

// Frozen from tests/oracles/sweep_spectral (3000 samples, max 0.881, margin 1.5).
constexpr double kHolderEmbedding = 1.3;

double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

Signal first_derivative(const Signal& u) {
  Eigen::VectorXcd s(static_cast<Eigen::Index>(u.size()));
  for (std::size_t k = 0; k < u.size(); ++k) s(static_cast<Eigen::Index>(k)) = cplx(0, u.grid().frequency(k));
  return apply_symbol(s, u);
}

SeminormOptions window_opts() {
  SeminormOptions o;
  o.domain = SeminormDomain::window;
  return o;
}

}  // namespace

TEST(TimeGrid, FrequenciesAndWindow) {
  const TimeGrid g(16, 8.0, Window{0.0, 2.0});
  EXPECT_DOUBLE_EQ(g.spacing(), 0.5);
  EXPECT_EQ(g.window_first(), 8u);
  EXPECT_EQ(g.window_last(), 12u);
  EXPECT_NEAR(g.frequency(8), -2 * kPi * 8 / 8.0, 1e-15);
  EXPECT_NEAR(g.frequency(1), 2 * kPi / 8.0, 1e-15);
  EXPECT_THROW(TimeGrid(12, 1.0), StructuralError);
  EXPECT_THROW(TimeGrid(16, 8.0, Window{0.0, 3.0}), StructuralError);
  EXPECT_THROW(TimeGrid(16, 8.0, Window{0.1, 1.0}), StructuralError);
}

TEST(TimeGrid, PaddedGridHasNodesAtEnds) {
  const TimeGrid g = make_padded_grid(1.0, 1024, 5.0);
  EXPECT_NEAR(g.time(g.window_first()), 0.0, 1e-12);
  EXPECT_NEAR(g.time(g.window_last()), 1.0, 1e-12);
  EXPECT_GE(g.period() / 2 - 1.0, 5.0 - 1e-12);
}

TEST(Signal, CsvRoundTrip) {
  std::mt19937_64 rng(1);
  const TimeGrid g(32, 4.0);
  const Signal u = testkit::random_trig(g, 2, rng, 3);
  std::stringstream ss;
  write_csv(ss, u, true);
  const Signal v = read_csv(ss);
  EXPECT_EQ(v.grid(), g);
  EXPECT_LT((v.values() - u.values()).norm(), 1e-14 * u.values().norm());
  EXPECT_THROW(Signal(g, Eigen::MatrixXcd::Constant(32, 1, cplx(NAN, 0))), DataError);
}

TEST(Multiplier, HilbertOfCosineIsSine) {
  const TimeGrid g(256, 2 * kPi);
  const Signal u = Signal::scalar(g, [](double t) { return std::cos(3 * t); });
  const Signal hu = apply_multiplier(hilbert(), u);
  for (std::size_t k = 0; k < g.size(); ++k) EXPECT_NEAR(std::abs(hu.values()(k, 0) - std::sin(3 * g.time(k))), 0, 1e-13);
}

TEST(Multiplier, FractionalDerivativeOfExponential) {
  const TimeGrid g(128, 2 * kPi);
  const double w = 5, a = 0.37;
  const Signal u = Signal::scalar(g, [&](double t) { return std::polar(1.0, w * t); });
  const Signal du = apply_multiplier(frac_derivative(a), u);
  const cplx f = std::pow(w, a) * std::polar(1.0, a * kPi / 2);
  for (std::size_t k = 0; k < g.size(); ++k) EXPECT_LT(std::abs(du.values()(k, 0) - f * u.values()(k, 0)), 1e-12);
}

TEST(Multiplier, HalfDerivativeSquaredIsDerivative) {
  std::mt19937_64 rng(2);
  const TimeGrid g(512, 20.0);
  const Signal u = testkit::random_trig(g, 3, rng, 20);
  const auto half = frac_derivative(0.5);
  const Signal a = apply_multiplier(half, apply_multiplier(half, u));
  const Signal b = first_derivative(u);
  EXPECT_LT((a.values() - b.values()).norm(), 1e-10 * b.values().norm());
}

TEST(Multiplier, PlancherelAdjointAndHilbertSquare) {
  std::mt19937_64 rng(3);
  const TimeGrid g(1024, 30.0);
  for (int rep = 0; rep < 10; ++rep) {
    const Signal u = testkit::random_trig(g, 2, rng, 40), v = testkit::random_trig(g, 2, rng, 40);
    EXPECT_NEAR(fft(u.values()).norm() / u.values().norm(), 1.0, 1e-12);
    const double a = 0.1 + 0.08 * rep;
    const cplx lhs = l2_inner(apply_multiplier(frac_derivative(a), u), v);
    const cplx rhs = l2_inner(u, apply_multiplier(frac_derivative_adjoint(a), v));
    EXPECT_LT(std::abs(lhs - rhs), 1e-10 * std::abs(lhs));
    Eigen::MatrixXcd m = u.values();
    m.rowwise() -= m.colwise().mean();
    const Signal z = u.with_values(m);
    const Signal hh = apply_multiplier(hilbert(), apply_multiplier(hilbert(), z));
    EXPECT_LT((hh.values() + z.values()).norm(), 1e-12 * z.values().norm());
  }
}

TEST(Multiplier, StabilizerSymbolBounds) {
  const TimeGrid g(64, 3.0);
  for (double d : {0.01, 0.3, 0.9}) {
    const Eigen::VectorXcd s = stabilizer(d).on(g);
    for (Eigen::Index k = 1; k < s.size(); ++k) {
      EXPECT_GE(std::abs(s(k)), 1 - d);
      EXPECT_LE(std::abs(s(k)), 1 + d + 1e-15);
    }
  }
}

TEST(Multiplier, WeakDerivativeCharacterization) {
  std::mt19937_64 rng(4);
  const TimeGrid g(512, 16.0);
  const Signal u = testkit::random_trig(g, 1, rng, 30);
  const Signal v = apply_multiplier(frac_derivative(0.6), u);
  for (int i = 0; i < 50; ++i) {
    const Signal phi = testkit::random_trig(g, 1, rng, 30);
    const cplx a = l2_inner(u, apply_multiplier(frac_derivative_adjoint(0.6), phi));
    const cplx b = l2_inner(v, phi);
    EXPECT_LT(std::abs(a - b), 1e-10 * std::max(1.0, std::abs(b)));
  }
}

TEST(CAlpha, HalfIsTwoPi) { EXPECT_NEAR(c_alpha(0.5), 2 * kPi, 1e-10); }

TEST(CAlpha, FrozenQuarterAndClosedForm) {
  // -4 Gamma(-2a) cos(pi a), evaluated independently.
  EXPECT_NEAR(c_alpha(0.25), 10.026513098524002, 1e-10);
  for (double a : {0.1, 0.3, 0.6, 0.75, 0.9})
    EXPECT_NEAR(c_alpha(a), -4 * std::tgamma(-2 * a) * std::cos(kPi * a), 1e-9 * c_alpha(a));
  EXPECT_THROW(c_alpha(0.0), DomainError);
  EXPECT_THROW(c_alpha(1.0), DomainError);
}

TEST(CAlpha, EvenIntegrandDoubling) {
  // Full-line integral by an independent route: panels of one period on [-R, R] plus tails.
  const double a = 0.35, g = 1 + 2 * a;
  auto f = [g](double s) {
    if (std::abs(s) < 1e-100) return 0.0;
    const double h = std::sin(s / 2);
    return 2 * h * h / std::pow(std::abs(s), g);
  };
  boost::math::quadrature::tanh_sinh<double> ts;
  double full = ts.integrate(f, -1.0, 0.0) + ts.integrate(f, 0.0, 1.0);
  const double R = 2 * kPi * 20000;
  for (double x = 1; x < R; x += 2 * kPi) {
    const double hi = std::min(R, x + 2 * kPi);
    const double p = boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, x, hi, 0, 1e-14);
    full += 2 * p;
  }
  full += 2 * std::pow(R, -2 * a) / (2 * a);  // mean of 1-cos is 1; oscillating remainder O(R^{-1-2a})
  EXPECT_NEAR(2 * full, c_alpha(a), 1e-5);
}

TEST(Gagliardo, ConstantIsZero) {
  const TimeGrid g(256, 8.0, Window{0.0, 2.0});
  const Signal u = Signal::scalar(g, [](double) { return cplx(3.0, 1.0); });
  EXPECT_NEAR(gagliardo_seminorm(u, 0.4, 2.0, window_opts()), 0.0, 1e-12);
  EXPECT_NEAR(gagliardo_seminorm(u, 0.4, 3.0, window_opts()), 0.0, 1e-12);
  EXPECT_THROW(gagliardo_seminorm(u, 1.0, 2.0), DomainError);
}

TEST(Gagliardo, IsometryAtPointThree) {
  std::mt19937_64 rng(5);
  const TimeGrid g(4096, 64.0);
  for (int i = 0; i < 5; ++i) {
    const Signal u = testkit::random_packet(g, 2, rng);
    const double fourier = c_alpha(0.3) * std::pow(derivative_norm(u, 0.3), 2);
    EXPECT_LT(rel(gagliardo_integral(u, 0.3, 2.0), fourier), 1e-4);
  }
}

TEST(Gagliardo, PolarizedIsometry) {
  std::mt19937_64 rng(6);
  const TimeGrid g(2048, 48.0);
  const double a = 0.45, c = c_alpha(a);
  for (int i = 0; i < 5; ++i) {
    const Signal u = testkit::random_packet(g, 1, rng), v = testkit::random_packet(g, 1, rng);
    // Real part of the bilinear form via the parallelogram identity.
    const double gag = 0.25 * (gagliardo_integral(u + v, a, 2.0) - gagliardo_integral(u - v, a, 2.0));
    const auto d = frac_derivative(a);
    const double four = c * l2_inner(apply_multiplier(d, u), apply_multiplier(d, v)).real();
    EXPECT_LT(std::abs(gag - four), 1e-4 * std::sqrt(gagliardo_integral(u, a, 2) * gagliardo_integral(v, a, 2)));
  }
}

TEST(Gagliardo, GeneralPathMatchesFastPath) {
  std::mt19937_64 rng(7);
  const TimeGrid g(512, 24.0);
  const Signal u = testkit::random_packet(g, 2, rng);
  // p slightly off 2 must approach the p = 2 autocorrelation route.
  for (auto dom : {SeminormDomain::torus, SeminormDomain::line}) {
    SeminormOptions o;
    o.domain = dom;
    const double a = gagliardo_integral(u, 0.4, 2.0, o);
    const double b = gagliardo_integral(u, 0.4, 2.0 + 1e-9, o);
    EXPECT_LT(rel(b, a), 1e-6);
  }
}

TEST(Gagliardo, HurwitzZeta) {
  EXPECT_NEAR(hurwitz_zeta(2.0, 1.0), kPi * kPi / 6, 1e-12);
  EXPECT_NEAR(hurwitz_zeta(1.2, 1.0), 5.591582441177750, 1e-10);
  EXPECT_NEAR(hurwitz_zeta(1.6, 2.5), hurwitz_zeta(1.6, 1.5) - std::pow(1.5, -1.6), 1e-13);
}

TEST(Gagliardo, HatFunctionAgainstAdaptiveQuadrature) {
  const double alpha = 0.25, s = 1 + 2 * alpha;
  auto hat = [](double t) { return std::max(0.0, 1 - std::abs(t)); };
  boost::math::quadrature::tanh_sinh<double> ts(8);
  // inner(t) = int_{-1}^{1} |u(t)-u(x)|^2/|t-x|^{1+2a} dx in the distance variable y = |t-x|,
  // split at the kinks so every piece is smooth.
  auto inner = [&](double t) {
    double acc = 0;
    const std::vector<double> cuts = {-1.0, 0.0, 1.0};
    for (int sgn : {-1, 1}) {
      std::vector<double> ys = {0.0};
      for (double c : cuts) {
        const double y = sgn * (c - t);
        if (y > 0) ys.push_back(y);
      }
      std::sort(ys.begin(), ys.end());
      auto f = [&](double y) {
        if (y < 1e-100) return 0.0;
        const double d = hat(t) - hat(t + sgn * y);
        return d * d / std::pow(y, s);
      };
      for (std::size_t i = 0; i + 1 < ys.size(); ++i) acc += ts.integrate(f, ys[i], ys[i + 1], 1e-12);
    }
    if (std::abs(t) >= 1) return acc;
    const double out = hat(t) * hat(t) * (std::pow(t + 1, -2 * alpha) + std::pow(1 - t, -2 * alpha)) / (2 * alpha);
    return acc + 2 * out;
  };
  const double oracle = ts.integrate(inner, -1.0, 0.0, 1e-10) + ts.integrate(inner, 0.0, 1.0, 1e-10);
  const TimeGrid g(4096, 16.0);
  const Signal u = Signal::scalar(g, [&](double t) { return cplx(hat(t)); });
  SeminormOptions line;
  line.domain = SeminormDomain::line;
  EXPECT_LT(rel(gagliardo_integral(u, alpha, 2.0, line), oracle), 1e-4);
}

TEST(Holder, ConstantAndSquareRoot) {
  const TimeGrid g(16384, 8.0, Window{-1.0, 1.0});
  const Signal c = Signal::scalar(g, [](double) { return cplx(2.0); });
  EXPECT_NEAR(holder_seminorm(c, 0.5), 0.0, 1e-15);
  const Signal r = Signal::scalar(g, [](double t) { return cplx(std::sqrt(std::abs(t))); });
  EXPECT_NEAR(holder_seminorm(r, 0.5), 1.0, 0.02);
}

TEST(Holder, EmbeddingIntoHolder) {
  std::mt19937_64 rng(8);
  const TimeGrid g(1024, 4.0, Window{0.0, 1.0});
  for (int i = 0; i < 50; ++i) {
    const Signal u = testkit::random_on_window(g, 1 + i % 3, rng, 2 + i % 6, false, 1);
    EXPECT_LE(holder_seminorm(u, 0.5), kHolderEmbedding * gagliardo_seminorm(u, 0.75, 4.0, window_opts()));
  }
}

TEST(ExtendReflect, ConstantGivesCutoff) {
  const TimeGrid g(512, 4.0, Window{0.0, 1.0});
  const Signal u = Signal::scalar(g, [](double t) { return cplx(t >= 0 && t <= 1 ? 1.0 : 0.0); });
  const auto e = extend_reflect(u);
  for (std::size_t k = 0; k < g.size(); ++k) {
    const double t = g.time(k);
    const double phi = t < 0 ? smooth_step(-t) : (t > 1 ? smooth_step(t - 1) : 1.0);
    EXPECT_NEAR(e.extended.values()(k, 0).real(), phi, 1e-14);
  }
  EXPECT_DOUBLE_EQ(e.metadata["K_max"].get<double>(), kReflectBound);
  EXPECT_THROW(extend_reflect(u.with_grid(g.without_window())), StructuralError);
}

TEST(ExtendReflect, SupportAndSeminormBound) {
  std::mt19937_64 rng(9);
  const TimeGrid g(1024, 4.0, Window{0.0, 1.0});
  for (int i = 0; i < 100; ++i) {
    const Signal u = testkit::random_on_window(g, 1 + i % 3, rng, 2 + i % 6, false, 1);
    const auto e = extend_reflect(u);
    for (std::size_t k = 0; k < g.size(); ++k) {
      const double t = g.time(k);
      if (t <= -1.0 || t >= 2.0) EXPECT_EQ(e.extended.values().row(k).norm(), 0.0);
    }
    const double ratio = gagliardo_seminorm(e.extended, 0.3, 2.0) / gagliardo_seminorm(u, 0.3, 2.0, window_opts());
    EXPECT_LE(ratio, kReflectBound);
  }
}

TEST(ExtendConst, ConstantRatioIsOne) {
  const TimeGrid g(256, 4.0, Window{0.0, 1.0});
  const Signal u = Signal::scalar(g, [](double) { return cplx(1.5); });
  const auto e = extend_const(u, Side::right, 0.75, 2.0);
  EXPECT_EQ(e.seminorm_ratio, 1.0);
  for (std::size_t k = g.window_first(); k < g.size(); ++k) EXPECT_EQ(e.extended.values()(k, 0), cplx(1.5));
  EXPECT_THROW(extend_const(u, Side::left, 0.4, 2.0), DomainError);
}

TEST(ExtendConst, LinearFunctionMatchesDoubleIntegral) {
  // Oracle: direct 2-D quadrature of the double integral of the extension on (-inf,1]^2.
  const double a = 0.75, s = 1 + 2 * a;
  boost::math::quadrature::tanh_sinh<double> ts;
  auto inner = [&](double t) {
    // distance variable y = |t - x| keeps the weak singularity at an endpoint
    auto f = [&](double y) { return y > 0 ? std::pow(y, 2 - s) : 0.0; };
    const double in = (t > 0 ? ts.integrate(f, 0.0, t) : 0.0) + (t < 1 ? ts.integrate(f, 0.0, 1.0 - t) : 0.0);
    // s < 0 where the extension is 0: int_{-inf}^0 t^2/(t-x)^{s} dx.
    return in + 2 * std::pow(t, 3 - s) / (s - 1);
  };
  const double oracle = std::sqrt(ts.integrate(inner, 0.0, 1.0));
  const TimeGrid g(2048, 4.0, Window{0.0, 1.0});
  const Signal u = Signal::scalar(g, [](double t) { return cplx(t); });
  const auto e = extend_const(u, Side::left, a, 2.0);
  EXPECT_LT(rel(e.extended_seminorm, oracle), 1e-4);
  EXPECT_NEAR(oracle * oracle, 32.0 / 9.0, 1e-8);
}

TEST(Hardy, RandomPolynomialsVanishingAtZero) {
  std::mt19937_64 rng(10);
  const TimeGrid g(1024, 4.0, Window{0.0, 1.0});
  for (int i = 0; i < 100; ++i) {
    const Signal u = testkit::random_on_window(g, 1 + i % 2, rng, 6, true);
    const auto r = hardy_check(u, 0.6, 2.0);
    EXPECT_TRUE(r.holds) << r.ratio << " vs " << r.constant;
    EXPECT_NEAR(r.constant, 11.0, 1e-12);
  }
}

TEST(LpEmbedding, ZeroAndGaussian) {
  const TimeGrid g(1024, 40.0);
  const auto z = lp_embedding_check(Signal::zeros(g, 1), 0.4, 4.0, 2.0);
  EXPECT_EQ(z.lp_norm, 0.0);
  EXPECT_EQ(z.rhs, 0.0);
  const Signal u = Signal::scalar(g, [](double t) { return cplx(std::exp(-t * t)); });
  const auto r = lp_embedding_check(u, 0.4, 4.0, 2.0);
  EXPECT_GT(r.slack, 0.0);
  EXPECT_LE(r.lp_norm, r.fourier_dual * (1 + 1e-12));
  EXPECT_THROW(lp_embedding_check(u, 0.4, 12.0, 2.0), DomainError);
  EXPECT_THROW(lp_embedding_check(u, 0.5, 2.0, 2.0), DomainError);
}

TEST(LpEmbedding, RandomBandLimited) {
  std::mt19937_64 rng(11);
  const TimeGrid g(1024, 40.0);
  for (int i = 0; i < 200; ++i) {
    const Signal u = testkit::random_trig(g, 1 + i % 2, rng, 25);
    const auto r = lp_embedding_check(u, 0.5, 6.0, i % 2 ? 1.0 : 10.0);
    EXPECT_TRUE(r.holds) << r.to_json().dump();
  }
}
