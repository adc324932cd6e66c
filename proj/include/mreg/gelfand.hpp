#pragma once

#include <memory>
#include <string>

#include <nlohmann/json.hpp>

#include "mreg/signal.hpp"

namespace mreg {

// V -> H -> V' in H-orthonormal coordinates; <v,w>_V = w^* B v.
class GelfandTriple {
 public:
  explicit GelfandTriple(Eigen::MatrixXd riesz_map);
  static GelfandTriple identity(Eigen::Index d);

  Eigen::Index dim() const { return B_.rows(); }
  const Eigen::MatrixXd& riesz_map() const { return B_; }
  const Eigen::VectorXd& eigenvalues() const { return lambda_; }
  const Eigen::MatrixXd& eigenvectors() const { return Q_; }
  double lambda_min() const { return lambda_(0); }
  double lambda_max() const { return lambda_(lambda_.size() - 1); }
  double embedding_constant() const { return 1.0 / std::sqrt(lambda_min()); }

  // B^{gamma/2}
  Eigen::MatrixXd power(double gamma) const;
  Eigen::VectorXcd apply_power(double gamma, const Eigen::VectorXcd& v) const;
  // Applies B^{gamma/2} to every sample, so Euclidean norms of the result are H_gamma norms.
  Signal to_space(const Signal& u, double gamma) const;

  bool operator==(const GelfandTriple& o) const { return B_ == o.B_; }

 private:
  Eigen::MatrixXd B_;
  Eigen::VectorXd lambda_;
  Eigen::MatrixXd Q_;
};

double h_gamma_norm(const GelfandTriple& T, const Eigen::VectorXcd& v, double gamma);
// ||u||_{L^2(H_gamma)} for a signal in H coordinates.
double l2_h_gamma_norm(const GelfandTriple& T, const Signal& u, double gamma);
// ||d^s u||_{L^2(H_gamma)}.
double derivative_h_gamma_norm(const GelfandTriple& T, const Signal& u, double s, double gamma);

struct FormMeasures {
  double M = 0.0;    // ||B^{-1/2} A B^{-1/2}||_2
  double eta = 0.0;  // lambda_min of the Hermitian part of the same matrix
};

// Normalized matrix B^{-1/2} A B^{-1/2}.
Eigen::MatrixXcd normalize_form(const GelfandTriple& T, const Eigen::MatrixXcd& A);
FormMeasures measure_form(const GelfandTriple& T, const Eigen::MatrixXcd& A);

// a(v,w) = w^* A v with measured bound M and coercivity eta > 0.
class CoerciveForm {
 public:
  CoerciveForm(GelfandTriple triple, Eigen::MatrixXcd matrix);

  const GelfandTriple& triple() const { return *triple_; }
  const Eigen::MatrixXcd& matrix() const { return A_; }
  double bound_M() const { return m_.M; }
  double coercivity_eta() const { return m_.eta; }
  cplx operator()(const Eigen::VectorXcd& v, const Eigen::VectorXcd& w) const { return w.dot(A_ * v); }
  bool is_hermitian(double tol = 1e-12) const;

 private:
  std::shared_ptr<const GelfandTriple> triple_;
  Eigen::MatrixXcd A_;
  FormMeasures m_;
};

CoerciveForm adjoint_form(const CoerciveForm& F);

// Fractional powers of the (generally non-normal) matrix of a sectorial operator.
class FractionalPower {
 public:
  enum class Method { eigen, resolvent_integral };

  explicit FractionalPower(const Eigen::MatrixXcd& A, double cond_limit = 1e8);
  Eigen::VectorXcd apply(double alpha, const Eigen::VectorXcd& v) const;
  Eigen::MatrixXcd matrix(double alpha) const;
  Method method() const { return method_; }
  double eigenvector_condition() const { return cond_; }

  // Balakrishnan integral with lambda = e^x, always available; exposed for testing.
  Eigen::VectorXcd apply_integral(double alpha, const Eigen::VectorXcd& v, double step = 0.1) const;

 private:
  Eigen::MatrixXcd A_;
  Eigen::MatrixXcd V_, Vinv_;
  Eigen::VectorXcd lambda_;
  double cond_ = 1.0;
  Method method_ = Method::eigen;
};

// A^alpha v for alpha in (-1/2, 1/2); alpha = 1/2 only for Hermitian forms.
// Two-sided envelope of ||A^alpha v||_H / ||v||_{H_{2 alpha}} for eta = 1, M = 10, d <= 8.
// Frozen from tests/oracles/sweep_kato (10500 forms per alpha).
struct KatoEnvelope {
  double alpha, lo, hi;
};
inline constexpr KatoEnvelope kKatoEnvelope[] = {{0.10, 0.90, 1.70}, {0.25, 0.90, 3.00}, {0.40, 0.85, 6.50}};

Eigen::VectorXcd kato_power(const CoerciveForm& F, const GelfandTriple& T, double alpha, const Eigen::VectorXcd& v);

nlohmann::json matrix_to_json(const Eigen::MatrixXcd& m);
Eigen::MatrixXcd matrix_from_json(const nlohmann::json& j);
nlohmann::json triple_to_json(const GelfandTriple& T);
GelfandTriple triple_from_json(const nlohmann::json& j);
nlohmann::json form_to_json(const CoerciveForm& F);
CoerciveForm form_from_json(const nlohmann::json& j);

}  // namespace mreg
