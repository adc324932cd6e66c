#include "mreg/nonauto_form.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "mreg/errors.hpp"
#include "mreg/fourier.hpp"
#include "mreg/fractional.hpp"
#include "mreg/parallel.hpp"

namespace mreg {

namespace {

using Eigen::Index;
using Eigen::MatrixXcd;

double spectral_norm(const MatrixXcd& m) {
  if (m.size() == 0) return 0.0;
  if (m.isApprox(m.adjoint(), 1e-14)) {
    Eigen::SelfAdjointEigenSolver<MatrixXcd> es(m, Eigen::EigenvaluesOnly);
    return es.eigenvalues().cwiseAbs().maxCoeff();
  }
  Eigen::BDCSVD<MatrixXcd> svd(m);
  return svd.singularValues()(0);
}

double hermitian_min(const MatrixXcd& m) {
  const MatrixXcd H = (0.5 * (m + m.adjoint())).eval();
  Eigen::SelfAdjointEigenSolver<MatrixXcd> es(H, Eigen::EigenvaluesOnly);
  return es.eigenvalues()(0);
}

std::pair<std::size_t, std::size_t> node_range(const TimeGrid& g) {
  if (g.has_window()) return {g.window_first(), g.window_last()};
  return {0, g.size() - 1};
}

// Gagliardo double integral over a node range, given the pair distance ||X_i - X_j||.
template <class Dist>
RegularityReport regularity_core(std::size_t N, double h, double s, double p, Dist dist) {
  if (!(s > 0.0 && s < 1.0)) throw DomainError("regularity index must lie in (0,1)");
  if (!(p >= 1.0) || !std::isfinite(p)) throw DomainError("integrability index must be finite and >= 1");
  RegularityReport r;
  r.s = s;
  r.p = p;
  if (N < 2) return r;
  const double T = static_cast<double>(N - 1) * h;
  const std::size_t nb = static_cast<std::size_t>(std::floor(std::log2(static_cast<double>(N - 1)))) + 1;
  std::vector<double> per_shift(N, 0.0);
  parallel_for(N - 1, [&](std::size_t jm) {
    const std::size_t j = jm + 1;
    const double x = static_cast<double>(j) * h;
    std::vector<double> terms;
    terms.reserve(N - j);
    for (std::size_t i = 0; i + j < N; ++i) {
      const double w = (i == 0 ? 0.5 : 1.0) * (i + j == N - 1 ? 0.5 : 1.0);
      const double d = dist(i, i + j);
      terms.push_back(w * std::pow(d, p));
    }
    per_shift[j] = 2.0 * h * h * pairwise_sum(terms) * std::pow(x, -1.0 - s * p);
  });
  r.bands.resize(nb);
  std::vector<std::vector<double>> band_terms(nb);
  for (std::size_t m = 0; m < nb; ++m) {
    r.bands[m].hi = T * std::ldexp(1.0, -static_cast<int>(m));
    r.bands[m].lo = T * std::ldexp(1.0, -static_cast<int>(m) - 1);
  }
  for (std::size_t j = 1; j < N; ++j) {
    const double ratio = static_cast<double>(N - 1) / static_cast<double>(j);
    auto m = static_cast<std::size_t>(std::floor(std::log2(ratio)));
    m = std::min(m, nb - 1);
    band_terms[m].push_back(per_shift[j]);
  }
  std::vector<double> contrib(nb);
  for (std::size_t m = 0; m < nb; ++m) contrib[m] = r.bands[m].contribution = pairwise_sum(band_terms[m]);
  r.integral = pairwise_sum(contrib);
  r.seminorm = std::pow(std::max(0.0, r.integral), 1.0 / p);

  // Slope over the finer half, skipping the finest band (only a handful of shifts).
  std::vector<double> xs, ys;
  for (std::size_t m = nb / 2; m + 1 < nb; ++m)
    if (contrib[m] > 0.0) {
      xs.push_back(static_cast<double>(m));
      ys.push_back(std::log2(contrib[m]));
    }
  if (xs.size() >= 2) {
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) mx += xs[i], my += ys[i];
    mx /= static_cast<double>(xs.size());
    my /= static_cast<double>(xs.size());
    double sxy = 0, sxx = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) sxy += (xs[i] - mx) * (ys[i] - my), sxx += (xs[i] - mx) * (xs[i] - mx);
    r.fine_slope = sxy / sxx;
  }
  return r;
}

void check_sample(const MatrixXcd& A, Index d) {
  if (A.rows() != d || A.cols() != d) throw StructuralError("sampled form matrix has the wrong dimension");
  if (!A.allFinite()) throw DataError("sampled form matrix has non-finite entries");
}

}  // namespace

nlohmann::json FormConstants::to_json() const {
  return {{"M", M}, {"eta", eta}, {"omega", omega}, {"M2", M2}, {"eta2", eta2}};
}

NonAutonomousForm::NonAutonomousForm(GelfandTriple triple, MatrixSampler sampler, nlohmann::json description)
    : triple_(std::make_shared<const GelfandTriple>(std::move(triple))),
      sampler_(std::move(sampler)),
      description_(std::move(description)) {
  if (!sampler_) throw StructuralError("form sampler is empty");
}

NonAutonomousForm NonAutonomousForm::autonomous(GelfandTriple triple, Eigen::MatrixXcd A) {
  check_sample(A, triple.dim());
  NonAutonomousForm F(std::move(triple), [A](double) { return A; }, {{"kind", "autonomous"}});
  F.autonomous_ = true;
  F.separable_ = SeparableStructure{A, MatrixXcd::Zero(A.rows(), A.cols()), [](double) { return 0.0; }};
  return F;
}

NonAutonomousForm NonAutonomousForm::separable(GelfandTriple triple, Eigen::MatrixXcd base, Eigen::MatrixXcd direction,
                                               ScalarProfile g, nlohmann::json description) {
  check_sample(base, triple.dim());
  check_sample(direction, triple.dim());
  if (!g) throw StructuralError("time profile is empty");
  if (description.is_null() || description.empty()) description = {{"kind", "separable"}};
  NonAutonomousForm F(
      std::move(triple), [base, direction, g](double t) -> MatrixXcd { return base + g(t) * direction; },
      std::move(description));
  F.separable_ = SeparableStructure{std::move(base), std::move(direction), std::move(g)};
  return F;
}

Eigen::MatrixXcd NonAutonomousForm::at(double t) const {
  MatrixXcd A = sampler_(t);
  check_sample(A, dim());
  return A;
}

NonAutonomousForm NonAutonomousForm::with_split(FormSplit split) const {
  if (!split.part1 || !split.part2) throw StructuralError("split needs both samplers");
  if (!(split.alpha > 0.0 && split.alpha <= 0.5)) throw DomainError("split alpha must lie in (0, 1/2]");
  if (!(split.beta >= 0.0 && split.beta < split.alpha)) throw DomainError("split beta must lie in [0, alpha)");
  NonAutonomousForm F = *this;
  F.split_ = std::move(split);
  return F;
}

NonAutonomousForm NonAutonomousForm::with_constants(FormConstants c) const {
  NonAutonomousForm F = *this;
  F.constants_ = c;
  return F;
}

NonAutonomousForm NonAutonomousForm::with_sampler(MatrixSampler sampler, nlohmann::json description) const {
  NonAutonomousForm F = *this;
  if (!sampler) throw StructuralError("form sampler is empty");
  F.sampler_ = std::move(sampler);
  F.description_ = std::move(description);
  F.separable_.reset();
  F.split_.reset();
  F.autonomous_ = false;
  return F;
}

SpaceTimeOperator::SpaceTimeOperator(TimeGrid grid, std::vector<Eigen::MatrixXcd> blocks)
    : grid_(std::move(grid)), blocks_(std::move(blocks)) {
  if (blocks_.size() != grid_.size()) throw StructuralError("one block per grid time is required");
}

SpaceTimeOperator::SpaceTimeOperator(TimeGrid grid, Eigen::MatrixXcd base, Eigen::MatrixXcd direction,
                                     std::vector<double> g)
    : grid_(std::move(grid)), affine_(true), base_(std::move(base)), dir_(std::move(direction)), g_(std::move(g)) {
  if (g_.size() != grid_.size()) throw StructuralError("one profile value per grid time is required");
  if (base_.rows() != base_.cols() || dir_.rows() != base_.rows() || dir_.cols() != base_.cols())
    throw StructuralError("base and direction must be square of equal size");
}

Eigen::MatrixXcd SpaceTimeOperator::block(std::size_t k) const {
  return affine_ ? (base_ + g_[k] * dir_).eval() : blocks_[k];
}

Signal SpaceTimeOperator::apply_impl(const Signal& v, bool adjoint) const {
  if (v.grid() != grid_ || v.dim() != dim()) throw StructuralError("signal does not match the operator");
  MatrixXcd out(v.values().rows(), v.dim());
  if (affine_) {
    // Rows are samples, so A v_k becomes V A^T.
    const MatrixXcd Bt = adjoint ? MatrixXcd(base_.conjugate()) : MatrixXcd(base_.transpose());
    const MatrixXcd Dt = adjoint ? MatrixXcd(dir_.conjugate()) : MatrixXcd(dir_.transpose());
    out.noalias() = v.values() * Bt;
    const MatrixXcd vd = v.values() * Dt;
    for (std::size_t k = 0; k < g_.size(); ++k) out.row(static_cast<Index>(k)) += g_[k] * vd.row(static_cast<Index>(k));
  } else {
    for (std::size_t k = 0; k < blocks_.size(); ++k)
      out.row(static_cast<Index>(k)) =
          ((adjoint ? MatrixXcd(blocks_[k].adjoint()) : blocks_[k]) * v.at(k)).transpose();
  }
  return Signal(grid_, std::move(out), SpaceTag(-1.0));
}

Signal SpaceTimeOperator::apply(const Signal& v) const { return apply_impl(v, false); }

Signal SpaceTimeOperator::apply_adjoint(const Signal& v) const { return apply_impl(v, true); }

cplx SpaceTimeOperator::pairing(const Signal& v, const Signal& w) const {
  return l2_inner(apply(v), w);
}

Eigen::MatrixXcd SpaceTimeOperator::mean_block() const {
  if (affine_) {
    double gm = 0.0;
    for (double x : g_) gm += x;
    return base_ + (gm / static_cast<double>(g_.size())) * dir_;
  }
  MatrixXcd m = MatrixXcd::Zero(dim(), dim());
  for (const auto& b : blocks_) m += b;
  return m / static_cast<double>(blocks_.size());
}

SpaceTimeOperator assemble_spacetime(const NonAutonomousForm& F, const TimeGrid& grid) {
  if (F.is_autonomous()) {
    const MatrixXcd A = F.at(0.0);
    return SpaceTimeOperator(grid, A, MatrixXcd::Zero(A.rows(), A.cols()), std::vector<double>(grid.size(), 0.0));
  }
  if (const auto& S = F.separable_structure()) {
    std::vector<double> g(grid.size());
    for (std::size_t k = 0; k < grid.size(); ++k) {
      g[k] = S->profile(grid.time(k));
      if (!std::isfinite(g[k])) throw DataError("form sample has non-finite entries");
    }
    return SpaceTimeOperator(grid, S->base, S->direction, std::move(g));
  }
  std::vector<MatrixXcd> blocks(grid.size());
  parallel_for(grid.size(), [&](std::size_t k) { blocks[k] = F.at(grid.time(k)); });
  return SpaceTimeOperator(grid, std::move(blocks));
}

cplx form_quadrature(const NonAutonomousForm& F, const Signal& v, const Signal& w) {
  if (v.grid() != w.grid() || v.dim() != F.dim() || w.dim() != F.dim())
    throw StructuralError("signals do not match the form");
  cplx s = 0.0;
  for (std::size_t k = 0; k < v.size(); ++k) s += w.at(k).dot(F.at(v.grid().time(k)) * v.at(k));
  return s * v.grid().spacing();
}

Signal mask_before(const Signal& v, double t) {
  MatrixXcd x = v.values();
  for (std::size_t k = 0; k < v.size(); ++k)
    if (!(v.grid().time(k) < t)) x.row(static_cast<Index>(k)).setZero();
  return v.with_values(std::move(x));
}

FormConstants estimate_constants(const NonAutonomousForm& F, const TimeGrid& grid) {
  const auto [i0, i1] = node_range(grid);
  const GelfandTriple& T = F.triple();
  const bool split = F.split().has_value();
  // Every constant is concave or convex in the scalar profile of a separable form, so only the
  // extreme profile values matter.
  std::vector<std::size_t> nodes;
  if (F.is_autonomous() && !split) {
    nodes = {i0};
  } else if (F.separable_structure() && !split) {
    std::size_t lo = i0, hi = i0;
    std::vector<double> g(i1 - i0 + 1);
    for (std::size_t k = i0; k <= i1; ++k) {
      g[k - i0] = F.separable_structure()->profile(grid.time(k));
      if (!std::isfinite(g[k - i0])) throw DataError("form sample has non-finite entries");
      if (g[k - i0] < g[lo - i0]) lo = k;
      if (g[k - i0] > g[hi - i0]) hi = k;
    }
    nodes = {lo};
    if (hi != lo) nodes.push_back(hi);
  } else {
    for (std::size_t k = i0; k <= i1; ++k) nodes.push_back(k);
  }
  const std::size_t N = nodes.size();
  std::vector<MatrixXcd> C(N);
  std::vector<double> norms(N), mins(N), norms2(N, 0.0), mins2(N, 0.0);
  const Eigen::MatrixXd Bi2 = T.power(-1.0);
  parallel_for(N, [&](std::size_t k) {
    const double t = grid.time(nodes[k]);
    const MatrixXcd A = F.at(t);
    C[k] = normalize_form(T, A);
    norms[k] = spectral_norm(C[k]);
    mins[k] = hermitian_min(C[k]);
    if (split) {
      const auto& S = *F.split();
      const MatrixXcd A1 = S.part1(t), A2 = S.part2(t);
      check_sample(A1, F.dim());
      check_sample(A2, F.dim());
      const double scale = std::max(1.0, A.cwiseAbs().maxCoeff());
      if ((A1 + A2 - A).cwiseAbs().maxCoeff() > 1e-10 * scale)
        throw DataError("split parts do not add up to the form");
      // |a2(v,w)| <= M2 ||v||_V ||w||_{H_gamma}, gamma = 1 + 2 beta - 2 alpha
      const double g = 1.0 + 2.0 * S.beta - 2.0 * S.alpha;
      norms2[k] = spectral_norm((T.power(-g).cast<cplx>() * A2 * Bi2.cast<cplx>()).eval());
      mins2[k] = hermitian_min(normalize_form(T, A2));
    }
  });
  FormConstants c;
  c.M = *std::max_element(norms.begin(), norms.end());
  const double mu = *std::min_element(mins.begin(), mins.end());
  if (split) {
    c.M2 = *std::max_element(norms2.begin(), norms2.end());
    c.eta2 = std::max(0.0, -*std::min_element(mins2.begin(), mins2.end()));
  }
  if (mu > 0.0) {
    c.eta = mu;
    return c;
  }
  // Shift search: eta(omega) = min_k lambda_min(Herm C_k + omega B^{-1}) is nondecreasing.
  const Eigen::MatrixXcd Binv = T.power(-2.0).cast<cplx>();
  auto eta_of = [&](double omega) {
    std::vector<double> m(N);
    parallel_for(N, [&](std::size_t k) { m[k] = hermitian_min((C[k] + omega * Binv).eval()); });
    return *std::min_element(m.begin(), m.end());
  };
  const double omega_max = 2.0 * std::abs(mu) * T.lambda_max() + 1e-12;
  if (!(eta_of(omega_max) > 0.0)) throw DomainError("form is not quasi-coercive");
  double lo = 0.0, hi = omega_max;
  for (int it = 0; it < 100 && hi - lo > 1e-12 * omega_max; ++it) {
    const double mid = 0.5 * (lo + hi);
    (eta_of(mid) > 0.0 ? hi : lo) = mid;
  }
  c.omega = std::min(omega_max, std::max(2.0 * hi, 1e-6 * T.lambda_max()));
  c.eta = eta_of(c.omega);
  if (!(c.eta > 0.0)) throw DomainError("form is not quasi-coercive");
  return c;
}

nlohmann::json RegularityReport::to_json() const {
  nlohmann::json b = nlohmann::json::array();
  for (const auto& x : bands) b.push_back({{"lo", x.lo}, {"hi", x.hi}, {"contribution", x.contribution}});
  return {{"s", s}, {"p", p}, {"integral", integral}, {"seminorm", seminorm}, {"fine_slope", fine_slope}, {"bands", b}};
}

RegularityReport form_regularity(const NonAutonomousForm& F, double s, double p, const TimeGrid& grid) {
  const auto [i0, i1] = node_range(grid);
  const std::size_t N = i1 - i0 + 1;
  const double h = grid.spacing();
  const GelfandTriple& T = F.triple();
  if (F.separable_structure()) {
    const auto& S = *F.separable_structure();
    const double c1 = spectral_norm(normalize_form(T, S.direction));
    if (F.is_autonomous() || c1 == 0.0) return regularity_core(N, h, s, p, [](std::size_t, std::size_t) { return 0.0; });
    std::vector<double> g(N);
    for (std::size_t k = 0; k < N; ++k) g[k] = S.profile(grid.time(i0 + k));
    return regularity_core(N, h, s, p, [&](std::size_t i, std::size_t j) { return c1 * std::abs(g[i] - g[j]); });
  }
  std::vector<MatrixXcd> C(N);
  parallel_for(N, [&](std::size_t k) { C[k] = normalize_form(T, F.at(grid.time(i0 + k))); });
  return regularity_core(N, h, s, p, [&](std::size_t i, std::size_t j) { return spectral_norm((C[i] - C[j]).eval()); });
}

RegularityReport profile_regularity(const ScalarProfile& g, double s, double p, const TimeGrid& grid) {
  const auto [i0, i1] = node_range(grid);
  const std::size_t N = i1 - i0 + 1;
  std::vector<double> v(N);
  for (std::size_t k = 0; k < N; ++k) v[k] = g(grid.time(i0 + k));
  return regularity_core(N, grid.spacing(), s, p, [&](std::size_t i, std::size_t j) { return std::abs(v[i] - v[j]); });
}

nlohmann::json CommutatorReport::to_json() const {
  return {{"gamma", gamma},         {"epsilon", epsilon},     {"delta0", delta0},   {"delta", delta},
          {"p", p},                 {"q", q},                 {"sup_G", sup_G},     {"G_seminorm", G_seminorm},
          {"h", h},                 {"rho", rho},             {"c_eps", c_eps},     {"lhs", lhs},
          {"d_gamma_v", d_gamma_v}, {"l2_v", l2_v},           {"rhs", rhs},         {"holds", holds},
          {"bounded_lhs", bounded_lhs}, {"bounded_rhs", bounded_rhs}, {"c_one", c_one}, {"bounded_holds", bounded_holds}};
}

CommutatorRecipe commutator_recipe(double gamma, double epsilon, double delta0, double sup_G, double G_seminorm,
                                   double h_max) {
  if (!(gamma > 0.0 && gamma <= 0.5)) throw DomainError("commutator index gamma must lie in (0, 1/2]");
  if (!(epsilon > 0.0)) throw DomainError("epsilon must be positive");
  if (!(delta0 > 0.0 && gamma + delta0 < 1.0)) throw DomainError("delta0 must lie in (0, 1 - gamma)");
  CommutatorRecipe r;
  r.gamma = gamma;
  r.epsilon = epsilon;
  r.delta0 = delta0;
  r.delta = delta0 / 2;
  r.sup_G = sup_G;
  r.G_seminorm = G_seminorm;
  // Hoelder pair for the near field: p > 1/gamma, q = 2p/(p-2).
  r.p = (gamma + delta0) / (gamma * (gamma + r.delta));
  r.q = 2 * r.p / (r.p - 2);
  const double M = sup_G, pg = r.p * gamma;
  const double Cn = std::pow(2 * M, (pg - 1) / pg) * std::pow(G_seminorm, 1 / pg);
  const double K = std::pow(2 / (pg - 1), 1 / r.p);
  const double Q = std::pow(2 / (r.delta * r.q), 1 / r.q);
  const double expo = 1 / pg - 1;  // < 0
  auto far = [&](double h) { return 2 * M / (std::sqrt(gamma) * std::pow(h, gamma)); };
  auto rho_of = [&](double h) {
    const double A1 = Cn * std::pow(h, r.delta) * Q * K;  // near-field factor at rho = 1
    return A1 > 0 ? std::pow(epsilon / A1, 1 / expo) : 0.0;
  };
  auto c_of = [&](double h) { return epsilon * rho_of(h) + far(h); };
  if (Cn == 0.0) {
    r.h = h_max;
    r.rho = 0.0;
    r.c_eps = far(h_max);
    return r;
  }
  // c(h) is unimodal in log h: golden section.
  double a = std::log(1e-8 * h_max), b = std::log(h_max);
  const double g = 0.5 * (std::sqrt(5.0) - 1);
  double x1 = b - g * (b - a), x2 = a + g * (b - a);
  double f1 = c_of(std::exp(x1)), f2 = c_of(std::exp(x2));
  for (int it = 0; it < 200 && b - a > 1e-10; ++it) {
    if (f1 < f2) {
      b = x2, x2 = x1, f2 = f1, x1 = b - g * (b - a), f1 = c_of(std::exp(x1));
    } else {
      a = x1, x1 = x2, f1 = f2, x2 = a + g * (b - a), f2 = c_of(std::exp(x2));
    }
  }
  r.h = std::exp(0.5 * (a + b));
  r.rho = rho_of(r.h);
  r.c_eps = c_of(r.h);
  return r;
}

CommutatorEstimate::CommutatorEstimate(const MatrixSampler& G, const TimeGrid& grid, Eigen::Index dim, double gamma,
                                       double epsilon, std::optional<double> delta0)
    : grid_(grid.without_window()), gamma_(gamma), epsilon_(epsilon) {
  const std::size_t n = grid_.size();
  const double h = grid_.spacing(), L = grid_.period();
  Gs_.resize(n);
  for (std::size_t k = 0; k < n; ++k) {
    Gs_[k] = G(grid_.time(k));
    check_sample(Gs_[k], dim);
  }
  GL_ = Gs_[0];
  GR_ = G(L / 2);
  check_sample(GR_, dim);
  double M = spectral_norm(GR_);
  for (const auto& g : Gs_) M = std::max(M, spectral_norm(g));
  const double d0 = delta0.value_or((1 - gamma) / 2);

  // [G] in W^{gamma+delta0, 1/gamma} over the torus segment plus the constant continuation tails.
  const double sig = gamma + d0, r = 1 / gamma;
  const auto core = regularity_core(n, h, sig, r, [&](std::size_t i, std::size_t j) {
    return spectral_norm((Gs_[i] - Gs_[j]).eval());
  });
  double tails = 0.0;
  for (std::size_t k = 1; k < n; ++k) {
    const double left = grid_.time(k) + L / 2, right = L / 2 - grid_.time(k);
    tails += std::pow(spectral_norm((Gs_[k] - GL_).eval()), r) * std::pow(left, -sig * r);
    tails += std::pow(spectral_norm((Gs_[k] - GR_).eval()), r) * std::pow(right, -sig * r);
  }
  tails *= 2 * h / (sig * r);
  const double Gsemi = std::pow(core.integral + tails, gamma);
  rec_ = commutator_recipe(gamma, epsilon, d0, M, Gsemi, L / 2);
  rec1_ = commutator_recipe(gamma, 1.0, d0, M, Gsemi, L / 2);
}

CommutatorReport CommutatorEstimate::check(const Signal& v) const {
  if (v.grid().without_window() != grid_ || v.dim() != Gs_.front().rows())
    throw StructuralError("signal does not match the commutator grid");
  const std::size_t n = grid_.size();
  const double h = grid_.spacing(), L = grid_.period();
  const Index d = v.dim();
  const MatrixXcd V = v.values().transpose();  // d x n
  // Products G_k v_s for the three kinds of partners a shifted node can meet.
  // All products go through one kernel so equal matrices give bitwise equal results.
  auto prod = [&](const MatrixXcd& G, Index s, MatrixXcd& out) {
    Eigen::VectorXcd y(d);
    y.noalias() = G * V.col(s);
    out.col(s) = y;
  };
  MatrixXcd self(d, static_cast<Index>(n)), left(d, static_cast<Index>(n)), right(d, static_cast<Index>(n));
  for (Index s = 0; s < static_cast<Index>(n); ++s) {
    prod(Gs_[static_cast<std::size_t>(s)], s, self);
    prod(GL_, s, left);
    prod(GR_, s, right);
  }

  // E(x) = int ||(G(s+x) - G(s)) v(s)||^2 ds
  auto shift_energy = [&](long j) {
    std::vector<double> t(n);
    Eigen::VectorXcd y(d);
    for (std::size_t s = 0; s < n; ++s) {
      const long k = static_cast<long>(s) + j;
      const auto si = static_cast<Index>(s);
      if (k < 0)
        y = left.col(si);
      else if (k >= static_cast<long>(n))
        y = right.col(si);
      else
        y.noalias() = Gs_[static_cast<std::size_t>(k)] * V.col(si);
      t[s] = (y - self.col(si)).squaredNorm();
    }
    return h * pairwise_sum(t);
  };
  const double beta = 1 - 2 * gamma_;
  double lhs2 = 0.0;
  for (int side : {1, -1}) {
    std::vector<double> g(n);
    parallel_for(n, [&](std::size_t jm) {
      const double x = static_cast<double>(jm + 1) * h;
      g[jm] = shift_energy(side * static_cast<long>(jm + 1)) / (x * x);
    });
    const double e_inf = g[n - 1] * L * L;
    lhs2 += singular_trapezoid(g, h, beta) + e_inf * std::pow(L, -2 * gamma_) / (2 * gamma_);
  }

  CommutatorReport out;
  out.gamma = gamma_;
  out.epsilon = epsilon_;
  out.delta0 = rec_.delta0;
  out.delta = rec_.delta;
  out.p = rec_.p;
  out.q = rec_.q;
  out.sup_G = rec_.sup_G;
  out.G_seminorm = rec_.G_seminorm;
  out.h = rec_.h;
  out.rho = rec_.rho;
  out.c_eps = rec_.c_eps;
  out.lhs = std::sqrt(std::max(0.0, lhs2));
  const Signal vg = v.with_grid(grid_);
  out.d_gamma_v = derivative_norm(vg, gamma_);
  out.l2_v = l2_norm(v);
  out.rhs = epsilon_ * out.d_gamma_v + rec_.c_eps * out.l2_v;
  out.holds = out.lhs <= out.rhs * (1 + 1e-9);

  const double Cg = c_alpha(gamma_), M = rec_.sup_G;
  out.c_one = rec1_.c_eps;
  out.bounded_lhs = derivative_norm(Signal(grid_, self.transpose()), gamma_);
  out.bounded_rhs = (M * std::sqrt(Cg) + 1) / std::sqrt(Cg) * out.d_gamma_v + rec1_.c_eps / std::sqrt(Cg) * out.l2_v;
  out.bounded_holds = out.bounded_lhs <= out.bounded_rhs * (1 + 1e-9);
  return out;
}

CommutatorReport commutator_check(const MatrixSampler& G, const Signal& v, double gamma, double epsilon,
                                  std::optional<double> delta0) {
  return CommutatorEstimate(G, v.grid(), v.dim(), gamma, epsilon, delta0).check(v);
}

NonAutonomousForm extend_form_to_line(const NonAutonomousForm& F, const TimeGrid& grid, const ExtensionOptions& opt) {
  if (!grid.has_window()) throw StructuralError("form extension needs an interval window");
  if (opt.mode == ExtensionMode::constant && !(opt.s * opt.p > 1.0))
    throw DomainError("constant extension needs a regularity index above the continuity threshold");
  if (F.is_autonomous()) return F;
  const Window w = grid.window();
  const std::size_t i0 = grid.window_first(), i1 = grid.window_last();

  auto average = [&](const MatrixSampler& S) {
    MatrixXcd m = MatrixXcd::Zero(F.dim(), F.dim());
    for (std::size_t k = i0; k <= i1; ++k) m += (k == i0 || k == i1 ? 0.5 : 1.0) * S(grid.time(k));
    return MatrixXcd(m * grid.spacing() / w.length());
  };
  auto extend = [&](const MatrixSampler& S) -> MatrixSampler {
    if (opt.mode == ExtensionMode::time_average) {
      const MatrixXcd avg = average(S);
      return [S, avg, w](double t) -> MatrixXcd { return (t < w.a || t > w.b) ? avg : S(t); };
    }
    const MatrixXcd left = S(w.a), right = S(w.b);
    return [S, left, right, w](double t) -> MatrixXcd { return t < w.a ? left : (t > w.b ? right : S(t)); };
  };

  nlohmann::json desc = {{"kind", "extended"},
                         {"mode", opt.mode == ExtensionMode::constant ? "constant" : "time_average"},
                         {"window", {w.a, w.b}},
                         {"base", F.description()}};
  NonAutonomousForm out = F.with_sampler(extend(F.sampler()), desc);
  if (F.separable_structure()) {
    const auto& S = *F.separable_structure();
    ScalarProfile g = S.profile;
    double gbar = 0.0;
    for (std::size_t k = i0; k <= i1; ++k) gbar += (k == i0 || k == i1 ? 0.5 : 1.0) * g(grid.time(k));
    gbar *= grid.spacing() / w.length();
    const double ga = g(w.a), gb = g(w.b);
    ScalarProfile ge;
    if (opt.mode == ExtensionMode::time_average)
      ge = [g, gbar, w](double t) { return (t < w.a || t > w.b) ? gbar : g(t); };
    else
      ge = [g, ga, gb, w](double t) { return t < w.a ? ga : (t > w.b ? gb : g(t)); };
    out = NonAutonomousForm::separable(F.triple(), S.base, S.direction, ge, desc);
  }
  if (F.split()) {
    FormSplit s = *F.split();
    s.part1 = extend(s.part1);
    s.part2 = extend(s.part2);
    out = out.with_split(std::move(s));
  }
  return out.with_constants(F.constants());
}

NonAutonomousForm shift_form(const NonAutonomousForm& F, double omega) {
  if (omega == 0.0) return F;
  const MatrixXcd I = MatrixXcd::Identity(F.dim(), F.dim());
  nlohmann::json desc = {{"kind", "shifted"}, {"omega", omega}, {"base", F.description()}};
  NonAutonomousForm out = F.with_sampler([S = F.sampler(), I, omega](double t) -> MatrixXcd { return S(t) + omega * I; }, desc);
  if (F.separable_structure()) {
    const auto& S = *F.separable_structure();
    out = NonAutonomousForm::separable(F.triple(), S.base + omega * I, S.direction, S.profile, desc);
    if (F.is_autonomous()) out = NonAutonomousForm::autonomous(F.triple(), S.base + omega * I);
  }
  if (F.split()) {
    FormSplit s = *F.split();
    s.part1 = [P = s.part1, I, omega](double t) -> MatrixXcd { return P(t) + omega * I; };
    out = out.with_split(std::move(s));
  }
  FormConstants c = F.constants();
  c.omega = std::max(0.0, c.omega - omega);
  return out.with_constants(c);
}

}  // namespace mreg
