#pragma once

#include <functional>
#include <string>

#include <nlohmann/json.hpp>

#include "mreg/nonauto_form.hpp"

namespace mreg {

enum class ProfileKind { constant, step, hoelder_theta, weierstrass };

ProfileKind profile_kind_from_string(const std::string& s);
std::string to_string(ProfileKind k);

// Scalar time profile g on [0, T] with a prescribed regularity threshold.
struct TimeProfile {
  ProfileKind kind = ProfileKind::constant;
  double s_target = 0.0, p_target = 2.0, T = 1.0;
  int terms = 0;  // lacunary sums only
  ScalarProfile g;
  nlohmann::json to_json() const;
};

// step: indicator of [T/2, T], threshold 1/p (s_target must equal it).
// hoelder_theta: Takagi-type sum of 2^{-j s} tent(2^j t / T).
// weierstrass: sum of 2^{-j s} cos(2^j pi t / T).
// Both sums stop at the first j with 2^{-j s} < 1e-6.
TimeProfile make_time_profile(double s_target, double p_target, ProfileKind kind, double T = 1.0);

struct CoefficientField {
  enum class Kind { separable, tabulated, kernel };
  Kind kind = Kind::separable;
  double eta_c = 1.0, M_c = 1.0;
  // separable: a(t, x) = a0(x) + g(t) b(x)
  std::function<double(double)> a0, b;
  ScalarProfile g;
  // tabulated: a(t, x) sampled at grid times and quadrature points
  std::function<double(double, double)> a;
  // kernel: K(t, x, y), symmetric in (x, y)
  std::function<double(double, double, double)> K;
  nlohmann::json profile = nlohmann::json::object();

  double value(double t, double x) const;

  static CoefficientField constant(double c);
  static CoefficientField separable(std::function<double(double)> a0, std::function<double(double)> b,
                                    ScalarProfile g, double eta, double M,
                                    nlohmann::json profile = nlohmann::json::object());
  static CoefficientField tabulated(std::function<double(double, double)> a, double eta, double M);
  static CoefficientField kernel(std::function<double(double, double, double)> K, double eta, double M);
};

// Real 2x2 coefficient matrix a^{lm}(t, x) of a two-component system.
struct SystemCoefficients {
  std::function<Eigen::Matrix2d(double, double)> a;
  double eta = 1.0;  // Legendre-Hadamard constant claimed for the sweep
  double M = 1.0;
  std::vector<double> sample_times{0.0};
  bool autonomous = false;

  static SystemCoefficients constant(const Eigen::Matrix2d& a, double eta, double M);
};

struct ProblemInstance {
  NonAutonomousForm form;
  std::string label;
  nlohmann::json notes = nlohmann::json::object();
  const GelfandTriple& triple() const { return form.triple(); }
};

// P1 elements on (0,1), Dirichlet, n_x cells. H coordinates are mass-orthonormal; V carries the
// H^1_0 seminorm (plain stiffness), so the normalized form of a == c is c times the identity.
ProblemInstance build_elliptic_1d(const CoefficientField& c, std::size_t n_x);

// Two components on the same mesh, unknowns ordered component by component.
ProblemInstance build_system_1d(const SystemCoefficients& c, std::size_t n_x);

// Torus [0,1) with n_x nodes, minimum-image distances, kernel form
// sum_{i != j} K (v_i - v_j) conj(w_i - w_j) |x_i - x_j|^{-1-2 beta} h^2. V adds the mass to the K == 1 form.
ProblemInstance build_frac_laplacian_1d(const CoefficientField& K, double beta, std::size_t n_x);

// Problem from a JSON description (see README for the schema); throws ConfigError naming the field.
ProblemInstance instance_from_json(const nlohmann::json& j, double T);
TimeProfile profile_from_json(const nlohmann::json& j, double T);

}  // namespace mreg
