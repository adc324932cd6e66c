#pragma once

#include <optional>

#include <nlohmann/json.hpp>

#include "mreg/signal.hpp"

namespace mreg {

// C_alpha = 2 * int_R (1 - cos s) / |s|^{1+2 alpha} ds.
double c_alpha(double alpha);

enum class SeminormDomain {
  torus,   // periodic continuation; the discrete stand-in for R
  line,    // whole torus, continued by zero outside it
  window,  // the grid's interval window only (I x I)
};

struct SeminormOptions {
  SeminormDomain domain = SeminormDomain::torus;
  // Generalized Euler-Maclaurin correction for the x^beta singularity at the diagonal.
  bool diagonal_correction = true;
  // Optional linear map applied to every sample before taking norms (e.g. B^{gamma/2}).
  std::optional<Eigen::MatrixXcd> norm_map;
};

// [u]_{W^{alpha,p}}^p, the double integral itself.
double gagliardo_integral(const Signal& u, double alpha, double p, const SeminormOptions& opt = {});
double gagliardo_seminorm(const Signal& u, double alpha, double p, const SeminormOptions& opt = {});

// sup over sample pairs of |u(t)-u(s)|/|t-s|^alpha (window if present, else all samples).
double holder_seminorm(const Signal& u, double alpha);

struct ReflectExtension {
  Signal extended;
  nlohmann::json metadata;
};

// Frozen bound for [E f]_{W^{0.3,2}(R)} / [f]_{W^{0.3,2}(I)} from a one-time sweep.
inline constexpr double kReflectBound = 4.0;

ReflectExtension extend_reflect(const Signal& u);
// Smooth step: 1 at x <= 0, 0 at x >= 1.
double smooth_step(double x);

enum class Side { left, right };

struct ConstExtension {
  Signal extended;
  double seminorm_ratio = 1.0;
  double extended_seminorm = 0.0;
  double interval_seminorm = 0.0;
};

ConstExtension extend_const(const Signal& u, Side side, double alpha, double p);

// Hardy-type term from the constant-extension bound:
// (int_I (|f(s)-f(a)| / (s-a)^alpha)^p ds)^{1/p} with a the left end of the window.
struct HardyReport {
  double lhs = 0.0;
  double seminorm = 0.0;
  double constant = 0.0;  // (1 + alpha - 1/p) / (alpha - 1/p)
  double ratio = 0.0;
  bool holds = true;
};
HardyReport hardy_check(const Signal& u, double alpha, double p);

struct LpEmbeddingReport {
  double alpha = 0, p_target = 0, rho = 0, q = 0;
  double lp_norm = 0;          // ||v||_{L^p}
  double fourier_dual = 0;     // (2 pi)^{1/p - 1/2} ||v^||_{L^p'}
  double holder_bound = 0;     // ||(rho + |xi|^alpha) v^||_2 * (sum dxi (rho+|xi|^alpha)^{-q})^{1/q}
  double constant = 0;         // (2/(q alpha - 1))^{1/q} rho^{1/(q alpha) - 1}
  double l2_norm = 0, d_alpha_norm = 0;
  double rhs = 0;
  double slack = 0;
  bool holds = true;
  nlohmann::json to_json() const;
};
LpEmbeddingReport lp_embedding_check(const Signal& u, double alpha, double p_target, double rho);

// sum_{m>=0} (m + a)^{-s}, s > 1, a > 0.
double hurwitz_zeta(double s, double a);

// int_0^{x_N} x^beta g(x) dx from g at x_j = j h, j = 1..N, trapezoid at the far end.
double singular_trapezoid(const std::vector<double>& g, double h, double beta, bool correct = true);

}  // namespace mreg
