#include <gtest/gtest.h>

#include <unsupported/Eigen/MatrixFunctions>

#include "mreg/errors.hpp"
#include "mreg/gelfand.hpp"
#include "mreg/random_models.hpp"

using namespace mreg;

namespace {

Eigen::VectorXcd rvec(Eigen::Index d, Rng& rng) { return random_complex(d, 1, rng).col(0); }

}  // namespace

TEST(Triple, ConstructionAndErrors) {
  Eigen::MatrixXd B(2, 2);
  B << 2, 1, 1, 3;
  const GelfandTriple T(B);
  EXPECT_NEAR(T.embedding_constant(), 1 / std::sqrt(T.lambda_min()), 1e-15);
  Eigen::MatrixXd bad = B;
  bad(0, 1) = 0.5;
  EXPECT_THROW(GelfandTriple{bad}, DataError);
  Eigen::MatrixXd indef(2, 2);
  indef << 1, 2, 2, 1;
  EXPECT_THROW(GelfandTriple{indef}, DataError);
}

TEST(Triple, HGammaNorms) {
  Rng rng(1);
  const GelfandTriple T(random_spd(6, rng, 50));
  for (int i = 0; i < 20; ++i) {
    const Eigen::VectorXcd v = rvec(6, rng);
    EXPECT_NEAR(h_gamma_norm(T, v, 0.0), v.norm(), 1e-13 * v.norm());
    const double vn = std::sqrt(std::real(v.dot(T.riesz_map().cast<cplx>() * v)));
    EXPECT_NEAR(h_gamma_norm(T, v, 1.0), vn, 1e-12 * vn);
    const Eigen::VectorXcd bi = T.riesz_map().cast<cplx>().llt().solve(v);
    EXPECT_NEAR(h_gamma_norm(T, v, -1.0), std::sqrt(std::real(v.dot(bi))), 1e-12 * v.norm());
  }
  const Eigen::VectorXcd e = T.eigenvectors().col(3).cast<cplx>();
  EXPECT_NEAR(h_gamma_norm(T, e, 1.0), std::sqrt(T.eigenvalues()(3)), 1e-12);
  EXPECT_THROW(h_gamma_norm(T, e, 1.5), DomainError);
}

TEST(Triple, LogConvexity) {
  Rng rng(2);
  for (int i = 0; i < 100; ++i) {
    const GelfandTriple T(random_spd(1 + i % 7, rng, 1e3));
    const Eigen::VectorXcd v = rvec(T.dim(), rng);
    for (double g : {0.25, 0.5, 0.75})
      EXPECT_LE(h_gamma_norm(T, v, g),
                std::pow(v.norm(), 1 - g) * std::pow(h_gamma_norm(T, v, 1.0), g) * (1 + 1e-12));
  }
}

TEST(Triple, SemigroupOfPowers) {
  Rng rng(3);
  const GelfandTriple T(random_spd(5, rng, 1e3));
  const Eigen::MatrixXd a = T.power(0.3) * T.power(-0.7), b = T.power(-0.4);
  EXPECT_LT((a - b).norm(), 1e-12 * b.norm());
  const Eigen::MatrixXd s = T.power(1.0);
  EXPECT_LT((s * s - T.riesz_map()).norm(), 1e-12 * T.riesz_map().norm());
}

TEST(Form, MeasuredConstants) {
  Rng rng(4);
  const GelfandTriple T(random_spd(5, rng, 100));
  const CoerciveForm F(T, random_coercive_matrix(T, 1.0, 10.0, rng));
  EXPECT_NEAR(F.bound_M(), 10.0, 1e-10);
  EXPECT_NEAR(F.coercivity_eta(), 1.0, 1e-10);
  // Rayleigh sweep: bound and coercivity on random vectors.
  for (int i = 0; i < 200; ++i) {
    const Eigen::VectorXcd v = rvec(5, rng), w = rvec(5, rng);
    const double nv = h_gamma_norm(T, v, 1), nw = h_gamma_norm(T, w, 1);
    EXPECT_LE(std::abs(F(v, w)), F.bound_M() * nv * nw * (1 + 1e-12));
    EXPECT_GE(F(v, v).real(), F.coercivity_eta() * nv * nv * (1 - 1e-12));
  }
  EXPECT_THROW(CoerciveForm(T, -T.riesz_map().cast<cplx>()), DomainError);
}

TEST(Form, AdjointInvolutionAndSymmetric) {
  Rng rng(5);
  const GelfandTriple T(random_spd(4, rng, 10));
  const CoerciveForm F(T, random_coercive_matrix(T, 1.0, 5.0, rng));
  const CoerciveForm G = adjoint_form(adjoint_form(F));
  EXPECT_EQ((G.matrix() - F.matrix()).norm(), 0.0);
  EXPECT_NEAR(adjoint_form(F).bound_M(), F.bound_M(), 1e-12);
  EXPECT_NEAR(adjoint_form(F).coercivity_eta(), F.coercivity_eta(), 1e-12);
  const CoerciveForm S(T, T.riesz_map().cast<cplx>());
  EXPECT_EQ((adjoint_form(S).matrix() - S.matrix()).norm(), 0.0);
}

TEST(Form, JsonRoundTrip) {
  Rng rng(6);
  const GelfandTriple T(random_spd(3, rng, 10));
  const CoerciveForm F(T, random_coercive_matrix(T, 1.0, 3.0, rng));
  const CoerciveForm G = form_from_json(nlohmann::json::parse(form_to_json(F).dump()));
  EXPECT_EQ(G.matrix(), F.matrix());
  EXPECT_TRUE(G.triple() == T);
}

TEST(Kato, IdentityAndSymmetricSquareRoot) {
  Rng rng(7);
  const GelfandTriple T(random_spd(6, rng, 100));
  Eigen::MatrixXcd A = random_complex(6, 6, rng);
  A = (A * A.adjoint() + Eigen::MatrixXcd::Identity(6, 6)).eval();
  const CoerciveForm F(T, A);
  for (int i = 0; i < 20; ++i) {
    const Eigen::VectorXcd v = rvec(6, rng);
    EXPECT_LT((kato_power(F, T, 0.0, v) - v).norm(), 1e-15);
    const double lhs = kato_power(F, T, 0.5, v).squaredNorm();
    EXPECT_NEAR(lhs, F(v, v).real(), 1e-8 * lhs);
  }
  const CoerciveForm N(T, random_coercive_matrix(T, 1.0, 10.0, rng));
  EXPECT_THROW(kato_power(N, T, 0.5, rvec(6, rng)), DomainError);
}

TEST(Kato, DualityIdentity) {
  Rng rng(8);
  for (int i = 0; i < 20; ++i) {
    const GelfandTriple T(random_spd(5, rng, 100));
    const CoerciveForm F(T, random_coercive_matrix(T, 1.0, 10.0, rng));
    const CoerciveForm Fs = adjoint_form(F);
    const Eigen::VectorXcd v = rvec(5, rng), w = rvec(5, rng);
    const cplx a = w.dot(kato_power(F, T, 0.3, v));
    const cplx b = kato_power(Fs, T, 0.3, w).dot(v);
    EXPECT_LT(std::abs(a - b), 1e-8 * std::abs(a));
  }
}

TEST(Kato, MatchesMatrixPowerOracle) {
  Rng rng(9);
  for (int i = 0; i < 10; ++i) {
    const GelfandTriple T(random_spd(4, rng, 100));
    const Eigen::MatrixXcd A = random_coercive_matrix(T, 1.0, 10.0, rng);
    const FractionalPower P(A);
    for (double a : {-0.4, 0.25, 0.45}) {
      const Eigen::MatrixXcd ref = A.pow(a);
      EXPECT_LT((P.matrix(a) - ref).norm(), 1e-9 * ref.norm());
      const Eigen::VectorXcd v = rvec(4, rng);
      EXPECT_LT((P.apply_integral(a, v) - ref * v).norm(), 1e-9 * (ref * v).norm());
    }
  }
}

TEST(Kato, FallbackOnIllConditionedEigenvectors) {
  // Nearly defective: a Jordan-like block with a tiny split.
  Eigen::MatrixXcd A(2, 2);
  A << 2.0, 1.0, 1e-18, 2.0;
  const FractionalPower P(A);
  EXPECT_EQ(P.method(), FractionalPower::Method::resolvent_integral);
  const Eigen::MatrixXcd ref = A.pow(0.3);
  EXPECT_LT((P.matrix(0.3) - ref).norm(), 1e-9 * ref.norm());
}

TEST(Kato, EnvelopeSweep) {
  Rng rng(10);
  for (const auto& env : kKatoEnvelope) {
    for (Eigen::Index d = 2; d <= 8; ++d) {
      double lo = 1e300, hi = 0;
      for (int i = 0; i < 10; ++i) {
        const GelfandTriple T(random_spd(d, rng, std::pow(10.0, uniform(rng, 0, 4))));
        const CoerciveForm F(T, random_coercive_matrix(T, 1.0, 10.0, rng));
        for (int k = 0; k < 5; ++k) {
          const Eigen::VectorXcd v = rvec(d, rng);
          const double r = kato_power(F, T, env.alpha, v).norm() / h_gamma_norm(T, v, 2 * env.alpha);
          lo = std::min(lo, r);
          hi = std::max(hi, r);
        }
      }
      EXPECT_GE(lo, env.lo) << "alpha " << env.alpha << " d " << d;
      EXPECT_LE(hi, env.hi) << "alpha " << env.alpha << " d " << d;
    }
  }
}
