#include "mreg/examples.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "mreg/errors.hpp"

namespace mreg {

namespace {

using Eigen::MatrixXcd;
using Eigen::MatrixXd;
using Eigen::VectorXd;

constexpr double kPi = std::numbers::pi;

double tent(double x) { return std::abs(x - std::round(x)); }

int lacunary_terms(double s) {
  int J = 0;
  while (std::pow(2.0, -J * s) >= 1e-6) ++J;
  return J;
}

// Inverse square root of the P1 mass matrix on n_x cells (interior nodes).
MatrixXd mass_inv_sqrt(std::size_t n_x) {
  const auto m = static_cast<Eigen::Index>(n_x - 1);
  const double h = 1.0 / static_cast<double>(n_x);
  MatrixXd M = MatrixXd::Zero(m, m);
  for (Eigen::Index i = 0; i < m; ++i) {
    M(i, i) = 2 * h / 3;
    if (i + 1 < m) M(i, i + 1) = M(i + 1, i) = h / 6;
  }
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(M);
  return es.eigenvectors() * es.eigenvalues().cwiseInverse().cwiseSqrt().asDiagonal() * es.eigenvectors().transpose();
}

// Weighted P1 stiffness with one value per cell (midpoint rule).
MatrixXd stiffness(const VectorXd& cell) {
  const auto n_x = cell.size();
  const auto m = n_x - 1;
  const double h = 1.0 / static_cast<double>(n_x);
  MatrixXd K = MatrixXd::Zero(m, m);
  for (Eigen::Index e = 0; e < n_x; ++e) {
    const double w = cell(e) / h;
    // cell e spans nodes e-1 and e (interior indices), boundary nodes dropped
    const Eigen::Index l = e - 1, r = e;
    if (l >= 0) K(l, l) += w;
    if (r < m) K(r, r) += w;
    if (l >= 0 && r < m) {
      K(l, r) -= w;
      K(r, l) -= w;
    }
  }
  return K;
}

VectorXd midpoints(std::size_t n_x) {
  VectorXd x(static_cast<Eigen::Index>(n_x));
  for (std::size_t e = 0; e < n_x; ++e) x(static_cast<Eigen::Index>(e)) = (static_cast<double>(e) + 0.5) / static_cast<double>(n_x);
  return x;
}

void check_bounds(const VectorXd& v, double eta, double M, const char* what) {
  const double lo = v.minCoeff(), hi = v.maxCoeff();
  const double tol = 1e-12 * std::max(1.0, M);
  if (!std::isfinite(lo) || !std::isfinite(hi) || lo < eta - tol || hi > M + tol)
    throw DataError(std::string(what) + " outside its declared bounds [" + std::to_string(eta) + ", " +
                    std::to_string(M) + "]: observed [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
}

template <class T>
T field(const nlohmann::json& j, const char* key) {
  if (!j.contains(key)) throw ConfigError(std::string("missing field '") + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw ConfigError(std::string("field '") + key + "' has the wrong type");
  }
}

template <class T>
T field_or(const nlohmann::json& j, const char* key, T fallback) {
  return j.contains(key) ? field<T>(j, key) : fallback;
}

// Number, or {"mean", "amp", "freq"} meaning mean + amp sin(2 pi freq x).
std::function<double(double)> spatial_from_json(const nlohmann::json& j, const char* key) {
  if (!j.contains(key)) throw ConfigError(std::string("missing field '") + key + "'");
  const auto& v = j.at(key);
  if (v.is_number()) {
    const double c = v.get<double>();
    return [c](double) { return c; };
  }
  if (!v.is_object()) throw ConfigError(std::string("field '") + key + "' must be a number or an object");
  const double mean = field<double>(v, "mean"), amp = field_or<double>(v, "amp", 0.0),
               freq = field_or<double>(v, "freq", 1.0);
  return [=](double x) { return mean + amp * std::sin(2 * kPi * freq * x); };
}

}  // namespace

ProfileKind profile_kind_from_string(const std::string& s) {
  if (s == "constant") return ProfileKind::constant;
  if (s == "step") return ProfileKind::step;
  if (s == "hoelder_theta") return ProfileKind::hoelder_theta;
  if (s == "weierstrass") return ProfileKind::weierstrass;
  throw ConfigError("unknown profile kind '" + s + "'");
}

std::string to_string(ProfileKind k) {
  switch (k) {
    case ProfileKind::constant: return "constant";
    case ProfileKind::step: return "step";
    case ProfileKind::hoelder_theta: return "hoelder_theta";
    case ProfileKind::weierstrass: return "weierstrass";
  }
  return "unknown";
}

nlohmann::json TimeProfile::to_json() const {
  return {{"kind", to_string(kind)}, {"s_target", s_target}, {"p_target", p_target}, {"T", T}, {"terms", terms}};
}

TimeProfile make_time_profile(double s_target, double p_target, ProfileKind kind, double T) {
  if (!(T > 0)) throw DomainError("profile interval must have positive length");
  if (!(p_target >= 1.0) || !std::isfinite(p_target)) throw DomainError("p_target must be finite and >= 1");
  TimeProfile P;
  P.kind = kind;
  P.s_target = s_target;
  P.p_target = p_target;
  P.T = T;
  switch (kind) {
    case ProfileKind::constant:
      P.g = [](double) { return 1.0; };
      return P;
    case ProfileKind::step:
      if (std::abs(s_target * p_target - 1.0) > 1e-12)
        throw DomainError("a step profile has threshold s = 1/p; requested s_target does not match");
      P.g = [T](double t) { return t >= T / 2 && t <= T ? 1.0 : 0.0; };
      return P;
    case ProfileKind::hoelder_theta:
    case ProfileKind::weierstrass:
      break;
  }
  if (!(s_target > 0.0 && s_target < 1.0)) throw DomainError("s_target must lie in (0,1)");
  P.terms = lacunary_terms(s_target);
  const int J = P.terms;
  if (kind == ProfileKind::hoelder_theta) {
    P.g = [=](double t) {
      double acc = 0.0;
      for (int j = 0; j < J; ++j) acc += std::pow(2.0, -j * s_target) * tent(std::ldexp(t / T, j));
      return acc;
    };
  } else {
    P.g = [=](double t) {
      double acc = 0.0;
      for (int j = 0; j < J; ++j) acc += std::pow(2.0, -j * s_target) * std::cos(std::ldexp(kPi * t / T, j));
      return acc;
    };
  }
  return P;
}

double CoefficientField::value(double t, double x) const {
  switch (kind) {
    case Kind::separable: return a0(x) + g(t) * b(x);
    case Kind::tabulated: return a(t, x);
    case Kind::kernel: break;
  }
  throw StructuralError("kernel fields have no pointwise value a(t, x)");
}

CoefficientField CoefficientField::constant(double c) {
  if (!(c > 0.0)) throw DomainError("constant coefficient must be positive");
  CoefficientField f;
  f.kind = Kind::separable;
  f.eta_c = f.M_c = c;
  f.a0 = [c](double) { return c; };
  f.b = [](double) { return 0.0; };
  f.g = [](double) { return 0.0; };
  f.K = [c](double, double, double) { return c; };
  f.profile = {{"kind", "constant"}};
  return f;
}

CoefficientField CoefficientField::separable(std::function<double(double)> a0, std::function<double(double)> b,
                                             ScalarProfile g, double eta, double M, nlohmann::json profile) {
  if (!(eta > 0.0 && M >= eta)) throw DomainError("coefficient bounds need 0 < eta <= M");
  CoefficientField f;
  f.kind = Kind::separable;
  f.eta_c = eta;
  f.M_c = M;
  f.a0 = std::move(a0);
  f.b = std::move(b);
  f.g = std::move(g);
  f.profile = std::move(profile);
  return f;
}

CoefficientField CoefficientField::tabulated(std::function<double(double, double)> a, double eta, double M) {
  if (!(eta > 0.0 && M >= eta)) throw DomainError("coefficient bounds need 0 < eta <= M");
  CoefficientField f;
  f.kind = Kind::tabulated;
  f.eta_c = eta;
  f.M_c = M;
  f.a = std::move(a);
  return f;
}

CoefficientField CoefficientField::kernel(std::function<double(double, double, double)> K, double eta, double M) {
  if (!(eta > 0.0 && M >= eta)) throw DomainError("kernel bounds need 0 < eta <= M");
  CoefficientField f;
  f.kind = Kind::kernel;
  f.eta_c = eta;
  f.M_c = M;
  f.K = std::move(K);
  return f;
}

SystemCoefficients SystemCoefficients::constant(const Eigen::Matrix2d& a, double eta, double M) {
  SystemCoefficients c;
  c.a = [a](double, double) { return a; };
  c.eta = eta;
  c.M = M;
  c.autonomous = true;
  return c;
}

ProblemInstance build_elliptic_1d(const CoefficientField& c, std::size_t n_x) {
  if (n_x < 4) throw DomainError("elliptic example needs at least 4 cells");
  if (c.kind == CoefficientField::Kind::kernel) throw StructuralError("elliptic example needs a pointwise coefficient");
  const MatrixXd S = mass_inv_sqrt(n_x);
  const VectorXd xm = midpoints(n_x);
  const auto ones = VectorXd::Ones(static_cast<Eigen::Index>(n_x));
  const GelfandTriple T((S * stiffness(ones) * S).eval());
  auto to_h = [S](const VectorXd& cell) { return MatrixXcd((S * stiffness(cell) * S).cast<cplx>()); };
  const nlohmann::json desc = {{"kind", "elliptic_1d"}, {"n_x", n_x}, {"profile", c.profile}};
  nlohmann::json notes = {{"n_x", n_x}, {"eta_c", c.eta_c}, {"M_c", c.M_c}};

  if (c.kind == CoefficientField::Kind::separable) {
    VectorXd a0(xm.size()), b(xm.size());
    for (Eigen::Index e = 0; e < xm.size(); ++e) {
      a0(e) = c.a0(xm(e));
      b(e) = c.b(xm(e));
    }
    const double eta = c.eta_c, M = c.M_c;
    const ScalarProfile g = c.g;
    if (b.cwiseAbs().maxCoeff() == 0.0) {
      check_bounds(a0, eta, M, "coefficient");
      return {NonAutonomousForm::autonomous(T, to_h(a0)), "elliptic_1d", notes};
    }
    // Bounds are checked on every profile value the solver asks for.
    ScalarProfile checked = [a0, b, g, eta, M](double t) {
      const double gt = g(t);
      check_bounds((a0 + gt * b).eval(), eta, M, "coefficient");
      return gt;
    };
    check_bounds((a0 + g(0.0) * b).eval(), eta, M, "coefficient");
    return {NonAutonomousForm::separable(T, to_h(a0), to_h(b), checked, desc), "elliptic_1d", notes};
  }
  const auto a = c.a;
  const double eta = c.eta_c, M = c.M_c;
  MatrixSampler sampler = [=](double t) {
    VectorXd cell(xm.size());
    for (Eigen::Index e = 0; e < xm.size(); ++e) cell(e) = a(t, xm(e));
    check_bounds(cell, eta, M, "coefficient");
    return to_h(cell);
  };
  sampler(0.0);
  return {NonAutonomousForm(T, sampler, desc), "elliptic_1d", notes};
}

ProblemInstance build_system_1d(const SystemCoefficients& c, std::size_t n_x) {
  if (n_x < 4) throw DomainError("system example needs at least 4 cells");
  const MatrixXd S = mass_inv_sqrt(n_x);
  const VectorXd xm = midpoints(n_x);
  const auto m = static_cast<Eigen::Index>(n_x - 1);
  const MatrixXd K1 = S * stiffness(VectorXd::Ones(static_cast<Eigen::Index>(n_x))) * S;
  MatrixXd B = MatrixXd::Zero(2 * m, 2 * m);
  B.topLeftCorner(m, m) = K1;
  B.bottomRightCorner(m, m) = K1;
  const GelfandTriple T(B);

  // Legendre-Hadamard at d = 1: Re zeta^* a zeta >= eta |zeta|^2 for all complex zeta.
  for (double t : c.sample_times) {
    for (Eigen::Index e = 0; e < xm.size(); ++e) {
      const Eigen::Matrix2d a = c.a(t, xm(e));
      if (!a.allFinite()) throw DataError("system coefficient has non-finite entries");
      const double lh = Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d>(0.5 * (a + a.transpose())).eigenvalues()(0);
      if (lh < c.eta * (1 - 1e-12))
        throw DataError("Legendre-Hadamard condition fails at t = " + std::to_string(t) + ", x = " +
                        std::to_string(xm(e)) + " (" + std::to_string(lh) + " < " + std::to_string(c.eta) + ")");
      if (a.norm() > 2 * c.M * (1 + 1e-12)) throw DataError("system coefficient exceeds its declared bound");
    }
  }
  const auto coef = c.a;
  MatrixSampler sampler = [=](double t) {
    MatrixXcd A(2 * m, 2 * m);
    std::array<VectorXd, 4> cell;
    for (auto& v : cell) v.resize(xm.size());
    for (Eigen::Index e = 0; e < xm.size(); ++e) {
      const Eigen::Matrix2d a = coef(t, xm(e));
      if (!a.allFinite()) throw DataError("system coefficient has non-finite entries");
      cell[0](e) = a(0, 0);
      cell[1](e) = a(0, 1);
      cell[2](e) = a(1, 0);
      cell[3](e) = a(1, 1);
    }
    // Block (l, m) pairs test component l with trial component m.
    A.topLeftCorner(m, m) = (S * stiffness(cell[0]) * S).cast<cplx>();
    A.topRightCorner(m, m) = (S * stiffness(cell[1]) * S).cast<cplx>();
    A.bottomLeftCorner(m, m) = (S * stiffness(cell[2]) * S).cast<cplx>();
    A.bottomRightCorner(m, m) = (S * stiffness(cell[3]) * S).cast<cplx>();
    return A;
  };
  nlohmann::json notes = {{"n_x", n_x}, {"components", 2}, {"lh_eta", c.eta}};
  if (c.autonomous) return {NonAutonomousForm::autonomous(T, sampler(0.0)), "system_1d", notes};
  return {NonAutonomousForm(T, sampler, {{"kind", "system_1d"}, {"n_x", n_x}}), "system_1d", notes};
}

ProblemInstance build_frac_laplacian_1d(const CoefficientField& K, double beta, std::size_t n_x) {
  if (!(beta > 0.0 && beta < 1.0)) throw DomainError("beta must lie in (0,1)");
  if (n_x < 4) throw DomainError("fractional example needs at least 4 nodes");
  if (!K.K) throw StructuralError("fractional example needs a kernel");
  const auto n = static_cast<Eigen::Index>(n_x);
  const double h = 1.0 / static_cast<double>(n_x);
  // Minimum-image weights h^2 |x_i - x_j|^{-1-2 beta}.
  MatrixXd W = MatrixXd::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) {
      if (i == j) continue;
      const auto k = std::min(std::abs(i - j), n - std::abs(i - j));
      W(i, j) = h * h * std::pow(static_cast<double>(k) * h, -1 - 2 * beta);
    }
  // a(v,v) = sum w_ij |v_i - v_j|^2 = 2 v^*(D - W) v in nodal values; H coordinates are sqrt(h) v.
  auto form = [W, n, h](const MatrixXd& Kmat) {
    const MatrixXd Wk = W.cwiseProduct(Kmat);
    MatrixXd A = -Wk;
    for (Eigen::Index i = 0; i < n; ++i) A(i, i) += Wk.row(i).sum();
    return MatrixXd(2 * A / h);
  };
  auto kernel_at = [K, n, h](double t) {
    MatrixXd Km(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = 0; j < n; ++j) Km(i, j) = i == j ? 0.0 : K.K(t, i * h, j * h);
    if (!Km.allFinite()) throw DataError("kernel has non-finite values");
    if ((Km - Km.transpose()).cwiseAbs().maxCoeff() > 1e-12 * std::max(1.0, Km.cwiseAbs().maxCoeff()))
      throw DataError("kernel is not symmetric in (x, y)");
    MatrixXd off = Km;
    off.diagonal().setConstant(K.eta_c);
    check_bounds(Eigen::Map<const VectorXd>(off.data(), off.size()), K.eta_c, K.M_c, "kernel");
    return Km;
  };
  const MatrixXd A1 = form(MatrixXd::Ones(n, n));
  const GelfandTriple T((A1 + MatrixXd::Identity(n, n)).eval());
  kernel_at(0.0);
  nlohmann::json notes = {{"n_x", n_x}, {"beta", beta}, {"eta_c", K.eta_c}, {"M_c", K.M_c}};
  const nlohmann::json desc = {{"kind", "frac_laplacian_1d"}, {"n_x", n_x}, {"beta", beta}};
  MatrixSampler sampler = [=](double t) { return MatrixXcd(form(kernel_at(t)).cast<cplx>()); };
  return {NonAutonomousForm(T, sampler, desc), "frac_laplacian_1d", notes};
}

TimeProfile profile_from_json(const nlohmann::json& j, double T) {
  const auto kind = profile_kind_from_string(field<std::string>(j, "kind"));
  const double p = field_or<double>(j, "p_target", 2.0);
  const double s = kind == ProfileKind::step ? field_or<double>(j, "s_target", 1.0 / p)
                   : kind == ProfileKind::constant ? field_or<double>(j, "s_target", 1.0)
                                                   : field<double>(j, "s_target");
  try {
    return make_time_profile(s, p, kind, T);
  } catch (const DomainError& e) {
    throw ConfigError(std::string("profile: ") + e.what());
  }
}

ProblemInstance instance_from_json(const nlohmann::json& j, double T) {
  const auto problem = field<std::string>(j, "problem");
  const auto n_x = field<std::size_t>(j, "n_x");
  if (n_x < 4 || n_x > 4096) throw ConfigError("field 'n_x' must lie in [4, 4096]");

  // Optional scalar time profile shared by all kinds.
  TimeProfile prof = make_time_profile(1.0, 2.0, ProfileKind::constant, T);
  bool has_profile = false;
  if (j.contains("profile")) {
    prof = profile_from_json(j.at("profile"), T);
    has_profile = prof.kind != ProfileKind::constant;
  }
  // Bounds of g over [0, T] on a fine sample for the declared coefficient bounds.
  double gmin = 0.0, gmax = 0.0;
  if (has_profile) {
    gmin = 1e300;
    gmax = -1e300;
    for (int k = 0; k <= 4096; ++k) {
      const double v = prof.g(T * k / 4096.0);
      gmin = std::min(gmin, v);
      gmax = std::max(gmax, v);
    }
  }

  if (problem == "elliptic_1d") {
    const auto a0 = spatial_from_json(j, "a0");
    const auto b = j.contains("b") ? spatial_from_json(j, "b") : [](double) { return 0.0; };
    double lo = 1e300, hi = -1e300;
    for (int k = 0; k <= 1024; ++k) {
      const double x = k / 1024.0;
      for (double g : {gmin, gmax}) {
        const double v = a0(x) + (has_profile ? g : 0.0) * b(x);
        lo = std::min(lo, v);
        hi = std::max(hi, v);
      }
    }
    if (!(lo > 0.0)) throw ConfigError("coefficient a0 + g b is not positive on [0,1] x [0,T]");
    const double eta = field_or<double>(j, "eta", 0.999 * lo), M = field_or<double>(j, "M", 1.001 * hi);
    const ScalarProfile g = has_profile ? prof.g : ScalarProfile([](double) { return 0.0; });
    auto inst = build_elliptic_1d(CoefficientField::separable(a0, b, g, eta, M, prof.to_json()), n_x);
    inst.notes["profile"] = prof.to_json();
    return inst;
  }
  if (problem == "system_1d") {
    const auto mat = field<std::vector<std::vector<double>>>(j, "matrix");
    if (mat.size() != 2 || mat[0].size() != 2 || mat[1].size() != 2) throw ConfigError("field 'matrix' must be 2x2");
    Eigen::Matrix2d a0;
    a0 << mat[0][0], mat[0][1], mat[1][0], mat[1][1];
    Eigen::Matrix2d dir = Eigen::Matrix2d::Zero();
    if (j.contains("direction")) {
      const auto d = field<std::vector<std::vector<double>>>(j, "direction");
      if (d.size() != 2 || d[0].size() != 2 || d[1].size() != 2) throw ConfigError("field 'direction' must be 2x2");
      dir << d[0][0], d[0][1], d[1][0], d[1][1];
    }
    auto lh = [](const Eigen::Matrix2d& a) {
      return Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d>(0.5 * (a + a.transpose())).eigenvalues()(0);
    };
    const double eta = std::min(lh(a0 + gmin * dir), lh(a0 + gmax * dir));
    if (!(eta > 0.0)) throw ConfigError("system matrix violates the Legendre-Hadamard condition");
    const double M = std::max((a0 + gmin * dir).norm(), (a0 + gmax * dir).norm());
    SystemCoefficients c;
    c.eta = field_or<double>(j, "eta", 0.999 * eta);
    c.M = M;
    const ScalarProfile g = prof.g;
    c.autonomous = !has_profile || dir.isZero();
    c.a = [a0, dir, g, has_profile](double t, double) { return Eigen::Matrix2d(a0 + (has_profile ? g(t) : 0.0) * dir); };
    c.sample_times = {0.0, T / 2, T};
    auto inst = build_system_1d(c, n_x);
    inst.notes["profile"] = prof.to_json();
    return inst;
  }
  if (problem == "frac_laplacian_1d") {
    const double beta = field<double>(j, "beta");
    if (!(beta > 0.0 && beta < 1.0)) throw ConfigError("field 'beta' must lie in (0,1)");
    const double mean = field<double>(j, "kernel_mean"), amp = field_or<double>(j, "kernel_amp", 0.0);
    const double gm = has_profile ? std::max(std::abs(gmin), std::abs(gmax)) : 0.0;
    if (!(mean - std::abs(amp) * gm > 0.0)) throw ConfigError("kernel is not positive");
    const ScalarProfile g = prof.g;
    auto K = CoefficientField::kernel(
        [=](double t, double x, double y) {
          return mean + (has_profile ? amp * g(t) : 0.0) * std::cos(2 * kPi * (x - y));
        },
        0.999 * (mean - std::abs(amp) * gm), 1.001 * (mean + std::abs(amp) * gm));
    K.profile = prof.to_json();
    auto inst = build_frac_laplacian_1d(K, beta, n_x);
    inst.notes["profile"] = prof.to_json();
    return inst;
  }
  throw ConfigError("unknown problem '" + problem + "' in field 'problem'");
}

}  // namespace mreg
