#include "mreg/gelfand.hpp"

#include <cmath>
#include <numbers>

#include "mreg/errors.hpp"
#include "mreg/fft.hpp"

namespace mreg {

GelfandTriple::GelfandTriple(Eigen::MatrixXd riesz_map) : B_(std::move(riesz_map)) {
  if (B_.rows() != B_.cols() || B_.rows() == 0) throw StructuralError("Riesz map must be square and nonempty");
  if (!B_.allFinite()) throw DataError("Riesz map has non-finite entries");
  const double scale = std::max(1.0, B_.cwiseAbs().maxCoeff());
  if ((B_ - B_.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale) throw DataError("Riesz map is not symmetric");
  B_ = 0.5 * (B_ + B_.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(B_);
  if (es.info() != Eigen::Success) throw NumericalError("eigendecomposition of the Riesz map failed");
  lambda_ = es.eigenvalues();
  Q_ = es.eigenvectors();
  if (!(lambda_(0) > 0.0)) throw DataError("Riesz map is not positive definite");
}

GelfandTriple GelfandTriple::identity(Eigen::Index d) { return GelfandTriple(Eigen::MatrixXd::Identity(d, d)); }

Eigen::MatrixXd GelfandTriple::power(double gamma) const {
  const Eigen::VectorXd p = lambda_.array().pow(gamma / 2).matrix();
  return Q_ * p.asDiagonal() * Q_.transpose();
}

Eigen::VectorXcd GelfandTriple::apply_power(double gamma, const Eigen::VectorXcd& v) const {
  if (v.size() != dim()) throw StructuralError("vector dimension does not match the triple");
  const Eigen::VectorXd p = lambda_.array().pow(gamma / 2).matrix();
  Eigen::VectorXcd y = Q_.transpose().cast<cplx>() * v;
  y = p.cast<cplx>().asDiagonal() * y;
  return Q_.cast<cplx>() * y;
}

Signal GelfandTriple::to_space(const Signal& u, double gamma) const {
  if (u.dim() != dim()) throw StructuralError("signal dimension does not match the triple");
  const Eigen::MatrixXcd P = power(gamma).cast<cplx>();
  return Signal(u.grid(), u.values() * P.transpose(), SpaceTag(gamma));
}

double h_gamma_norm(const GelfandTriple& T, const Eigen::VectorXcd& v, double gamma) {
  if (!(gamma >= -1.0 && gamma <= 1.0)) throw DomainError("gamma must lie in [-1,1]");
  return T.apply_power(gamma, v).norm();
}

double l2_h_gamma_norm(const GelfandTriple& T, const Signal& u, double gamma) {
  return derivative_h_gamma_norm(T, u, 0.0, gamma);
}

double derivative_h_gamma_norm(const GelfandTriple& T, const Signal& u, double s, double gamma) {
  if (u.dim() != T.dim()) throw StructuralError("signal dimension does not match the triple");
  // Diagonal in (frequency, B-eigenvector): weight |xi|^{2s} lambda^gamma.
  Eigen::MatrixXcd y = fft(u.values()) * T.eigenvectors().cast<cplx>();
  const Eigen::VectorXd lam = T.eigenvalues().array().pow(gamma).matrix();
  double acc = 0.0;
  for (std::size_t k = 0; k < u.size(); ++k) {
    const double xi = std::abs(u.grid().frequency(k));
    const double w = s == 0.0 ? 1.0 : (xi == 0.0 ? 0.0 : std::pow(xi, 2 * s));
    if (w == 0.0) continue;
    acc += w * y.row(static_cast<Eigen::Index>(k)).cwiseAbs2().dot(lam);
  }
  return std::sqrt(u.grid().spacing() * acc);
}

Eigen::MatrixXcd normalize_form(const GelfandTriple& T, const Eigen::MatrixXcd& A) {
  if (A.rows() != T.dim() || A.cols() != T.dim()) throw StructuralError("form matrix dimension mismatch");
  const Eigen::MatrixXcd S = T.power(-1.0).cast<cplx>();
  return S * A * S;
}

FormMeasures measure_form(const GelfandTriple& T, const Eigen::MatrixXcd& A) {
  if (!A.allFinite()) throw DataError("form matrix has non-finite entries");
  const Eigen::MatrixXcd C = normalize_form(T, A);
  FormMeasures m;
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(C);
  m.M = svd.singularValues()(0);
  const Eigen::MatrixXcd H = 0.5 * (C + C.adjoint());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(H, Eigen::EigenvaluesOnly);
  m.eta = es.eigenvalues()(0);
  return m;
}

CoerciveForm::CoerciveForm(GelfandTriple triple, Eigen::MatrixXcd matrix)
    : triple_(std::make_shared<const GelfandTriple>(std::move(triple))), A_(std::move(matrix)) {
  m_ = measure_form(*triple_, A_);
  if (!(m_.eta > 0.0)) throw DomainError("form is not coercive (eta <= 0)");
}

bool CoerciveForm::is_hermitian(double tol) const {
  return (A_ - A_.adjoint()).norm() <= tol * std::max(1.0, A_.norm());
}

CoerciveForm adjoint_form(const CoerciveForm& F) { return CoerciveForm(F.triple(), F.matrix().adjoint()); }

FractionalPower::FractionalPower(const Eigen::MatrixXcd& A, double cond_limit) : A_(A) {
  Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(A_);
  if (es.info() != Eigen::Success) {
    method_ = Method::resolvent_integral;
    cond_ = std::numeric_limits<double>::infinity();
    return;
  }
  lambda_ = es.eigenvalues();
  V_ = es.eigenvectors();
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(V_);
  const auto& sv = svd.singularValues();
  cond_ = sv(sv.size() - 1) > 0 ? sv(0) / sv(sv.size() - 1) : std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < lambda_.size(); ++i)
    if (!(lambda_(i).real() > 0.0)) throw DomainError("matrix is not sectorial (eigenvalue off the right half-plane)");
  if (cond_ > cond_limit) {
    method_ = Method::resolvent_integral;
    return;
  }
  Vinv_ = V_.inverse();
}

Eigen::VectorXcd FractionalPower::apply(double alpha, const Eigen::VectorXcd& v) const {
  if (alpha == 0.0) return v;
  if (method_ == Method::resolvent_integral) return apply_integral(alpha, v);
  Eigen::VectorXcd y = Vinv_ * v;
  for (Eigen::Index i = 0; i < y.size(); ++i) y(i) *= std::pow(lambda_(i), alpha);
  return V_ * y;
}

Eigen::MatrixXcd FractionalPower::matrix(double alpha) const {
  const Eigen::Index d = A_.rows();
  Eigen::MatrixXcd P(d, d);
  for (Eigen::Index j = 0; j < d; ++j) P.col(j) = apply(alpha, Eigen::VectorXcd::Unit(d, j));
  return P;
}

Eigen::VectorXcd FractionalPower::apply_integral(double alpha, const Eigen::VectorXcd& v, double step) const {
  if (!(alpha > -1.0 && alpha < 1.0)) throw DomainError("resolvent integral needs alpha in (-1,1)");
  if (alpha == 0.0) return v;
  const Eigen::Index d = A_.rows();
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(A_);
  const double smax = svd.singularValues()(0), smin = svd.singularValues()(d - 1);
  if (!(smin > 0.0)) throw NumericalError("singular matrix in the resolvent integral");
  // A^a v = sin(pi a)/pi int e^{a x} (e^x + A)^{-1} A v dx          (a > 0)
  // A^a v = sin(-pi a)/pi int e^{(1+a) x} (e^x + A)^{-1} v dx       (a < 0)
  const double up = alpha > 0 ? alpha : 1.0 + alpha;  // decay rate towards -inf
  const double down = 1.0 - up;                        // decay rate towards +inf
  const double lo = std::log(smin) - 40.0 / up, hi = std::log(smax) + 40.0 / down;
  const Eigen::VectorXcd rhs = alpha > 0 ? Eigen::VectorXcd(A_ * v) : v;
  Eigen::VectorXcd acc = Eigen::VectorXcd::Zero(d);
  const Eigen::MatrixXcd I = Eigen::MatrixXcd::Identity(d, d);
  const long steps = static_cast<long>(std::ceil((hi - lo) / step));
  for (long k = 0; k <= steps; ++k) {
    const double x = lo + static_cast<double>(k) * step;
    const double w = std::exp(up * x);
    Eigen::PartialPivLU<Eigen::MatrixXcd> lu(std::exp(x) * I + A_);
    acc += w * lu.solve(rhs);
  }
  const Eigen::VectorXcd out = std::sin(std::numbers::pi * std::abs(alpha)) / std::numbers::pi * step * acc;
  if (!out.allFinite()) throw NumericalError("resolvent integral produced non-finite values");
  return out;
}

Eigen::VectorXcd kato_power(const CoerciveForm& F, const GelfandTriple& T, double alpha, const Eigen::VectorXcd& v) {
  if (!(F.triple() == T)) throw StructuralError("form and triple do not match");
  const bool sym_half = alpha == 0.5 && F.is_hermitian();
  if (!(alpha > -0.5 && alpha < 0.5) && !sym_half) throw DomainError("kato_power needs alpha in (-1/2,1/2)");
  if (v.size() != T.dim()) throw StructuralError("vector dimension does not match the triple");
  return FractionalPower(F.matrix()).apply(alpha, v);
}

nlohmann::json matrix_to_json(const Eigen::MatrixXcd& m) {
  nlohmann::json re = nlohmann::json::array(), im = nlohmann::json::array();
  bool any_im = false;
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      re.push_back(m(i, j).real());
      im.push_back(m(i, j).imag());
      any_im = any_im || m(i, j).imag() != 0.0;
    }
  const bool herm = m.rows() == m.cols() && (m - m.adjoint()).norm() <= 1e-14 * std::max(1.0, m.norm());
  nlohmann::json j = {{"rows", m.rows()}, {"cols", m.cols()}, {"hermitian", herm}, {"real", re}};
  if (any_im) j["imag"] = im;
  return j;
}

Eigen::MatrixXcd matrix_from_json(const nlohmann::json& j) {
  const auto r = j.at("rows").get<Eigen::Index>(), c = j.at("cols").get<Eigen::Index>();
  const auto& re = j.at("real");
  if (static_cast<Eigen::Index>(re.size()) != r * c) throw ConfigError("matrix entry count does not match rows*cols");
  const bool has_im = j.contains("imag");
  Eigen::MatrixXcd m(r, c);
  for (Eigen::Index i = 0; i < r; ++i)
    for (Eigen::Index k = 0; k < c; ++k) {
      const auto idx = static_cast<std::size_t>(i * c + k);
      m(i, k) = cplx(re.at(idx).get<double>(), has_im ? j["imag"].at(idx).get<double>() : 0.0);
    }
  return m;
}

nlohmann::json triple_to_json(const GelfandTriple& T) {
  return {{"dim", T.dim()}, {"riesz_map", matrix_to_json(T.riesz_map().cast<cplx>())}};
}

GelfandTriple triple_from_json(const nlohmann::json& j) {
  const Eigen::MatrixXcd B = matrix_from_json(j.at("riesz_map"));
  if (B.imag().cwiseAbs().maxCoeff() > 0.0) throw ConfigError("Riesz map must be real");
  if (j.contains("dim") && j["dim"].get<Eigen::Index>() != B.rows()) throw ConfigError("triple dim mismatch");
  return GelfandTriple(B.real());
}

nlohmann::json form_to_json(const CoerciveForm& F) {
  return {{"triple", triple_to_json(F.triple())},
          {"matrix", matrix_to_json(F.matrix())},
          {"bound_M", F.bound_M()},
          {"coercivity_eta", F.coercivity_eta()}};
}

CoerciveForm form_from_json(const nlohmann::json& j) {
  return CoerciveForm(triple_from_json(j.at("triple")), matrix_from_json(j.at("matrix")));
}

}  // namespace mreg
