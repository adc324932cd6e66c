#include "mreg/verify.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <numbers>

#include <boost/math/quadrature/tanh_sinh.hpp>

#include "mreg/errors.hpp"
#include "mreg/examples.hpp"
#include "mreg/fourier.hpp"
#include "mreg/fractional.hpp"
#include "mreg/generators.hpp"
#include "mreg/gelfand.hpp"
#include "mreg/parallel.hpp"
#include "mreg/solver.hpp"
#include "mreg/stabilized.hpp"
#include "mreg/study.hpp"
#include "mreg/timestep.hpp"

namespace mreg {

namespace {

using Eigen::MatrixXcd;
using Eigen::VectorXcd;

constexpr double kPi = std::numbers::pi;

struct Ctx {
  Rng rng;
  double scale;
  std::size_t count(std::size_t n) const {
    return std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(static_cast<double>(n) * scale)));
  }
};

// measured value, sample count, detail
struct Outcome {
  double measured = 0.0;
  std::size_t samples = 0;
  nlohmann::json detail = nlohmann::json::object();
};

double bump(double t) { return std::abs(t) < 1 ? std::exp(-1 / (1 - t * t)) : 0.0; }

double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

Outcome isometry(Ctx& c) {
  const TimeGrid g(4096, 64.0);
  Outcome o;
  for (double a : {0.1, 0.25, 0.5, 0.75, 0.9}) {
    double worst = 0.0;
    for (std::size_t i = 0; i < c.count(50); ++i) {
      const Signal u = random_packet(g, 1, c.rng);
      worst = std::max(worst, rel(gagliardo_integral(u, a, 2.0), c_alpha(a) * std::pow(derivative_norm(u, a), 2)));
      ++o.samples;
    }
    o.detail[std::to_string(a).substr(0, 4)] = worst;
    o.measured = std::max(o.measured, worst);
  }
  return o;
}

Outcome c_half(Ctx&) { return {std::abs(c_alpha(0.5) - 2 * kPi), 1, {}}; }

Outcome hardy(Ctx& c) {
  const TimeGrid g(1024, 4.0, Window{0.0, 1.0});
  Outcome o;
  for (std::size_t i = 0; i < c.count(100); ++i) {
    const Signal u = random_on_window(g, 1 + static_cast<Eigen::Index>(i % 2), c.rng, 6, true);
    const auto r = hardy_check(u, 0.6, 2.0);
    o.measured = std::max(o.measured, r.ratio);
    o.detail["constant"] = r.constant;
    ++o.samples;
  }
  return o;
}

Outcome kato(Ctx& c) {
  Outcome o;
  double worst = -1e300;
  std::vector<std::array<double, 2>> ext(std::size(kKatoEnvelope), {1e300, 0.0});
  std::map<Eigen::Index, std::vector<std::array<double, 2>>> by_dim;
  for (std::size_t i = 0; i < c.count(200); ++i) {
    const Eigen::Index d = 2 + static_cast<Eigen::Index>(i % 7);
    const GelfandTriple T(random_spd(d, c.rng, std::pow(10.0, uniform(c.rng, 0, 4))));
    const CoerciveForm F(T, random_coercive_matrix(T, 1.0, 10.0, c.rng));
    auto& dext = by_dim.try_emplace(d, std::size(kKatoEnvelope), std::array<double, 2>{1e300, 0.0}).first->second;
    for (std::size_t e = 0; e < std::size(kKatoEnvelope); ++e) {
      const auto& env = kKatoEnvelope[e];
      for (int k = 0; k < 5; ++k) {
        const VectorXcd v = random_complex(d, 1, c.rng).col(0);
        const double r = kato_power(F, T, env.alpha, v).norm() / h_gamma_norm(T, v, 2 * env.alpha);
        ext[e][0] = std::min(ext[e][0], r);
        ext[e][1] = std::max(ext[e][1], r);
        dext[e][0] = std::min(dext[e][0], r);
        dext[e][1] = std::max(dext[e][1], r);
        // Distance outside the envelope, negative inside.
        worst = std::max({worst, env.lo - r, r - env.hi});
      }
    }
    ++o.samples;
  }
  for (std::size_t e = 0; e < ext.size(); ++e)
    o.detail["alpha_" + std::to_string(kKatoEnvelope[e].alpha).substr(0, 4)] = {ext[e][0], ext[e][1]};
  // Per-dimension ranges: the envelope should not drift with d.
  for (const auto& [d, v] : by_dim)
    for (std::size_t e = 0; e < v.size(); ++e)
      o.detail["by_dim"]["d" + std::to_string(d)]["alpha_" + std::to_string(kKatoEnvelope[e].alpha).substr(0, 4)] = {
          v[e][0], v[e][1]};
  o.measured = worst;
  return o;
}

Outcome commutator(Ctx& c) {
  const TimeGrid grid(1024, 20.0);
  Outcome o;
  for (double gamma : {0.25, 0.5}) {
    for (std::size_t i = 0; i < c.count(50); ++i) {
      const MatrixXcd X = random_complex(2, 2, c.rng), Y = random_complex(2, 2, c.rng);
      const double w = uniform(c.rng, 1.0, 3.0), s = uniform(c.rng, -2.0, 2.0);
      const MatrixSampler G = [=](double t) -> MatrixXcd { return bump((t - s) / w) * X + Y; };
      const CommutatorEstimate est(G, grid, 2, gamma, 0.1);
      const auto r = est.check(random_packet(grid, 2, c.rng, 1.0, 6.0));
      o.measured = std::max(o.measured, r.rhs > 0 ? r.lhs / r.rhs : 0.0);
      ++o.samples;
    }
  }
  return o;
}

Outcome coercivity(Ctx& c) {
  const TimeGrid g(128, 8.0);
  Outcome o;
  o.measured = -1e300;
  for (std::size_t fam = 0; fam < c.count(10); ++fam) {
    const GelfandTriple T(random_spd(3, c.rng, 100));
    const double ratio = uniform(c.rng, 1.0, 50.0);
    const auto F = random_smooth_family(T, c.rng, 1.0, ratio, 0.3, 3, g.period() / 2);
    const FormConstants k = estimate_constants(F, g);
    const double delta = k.eta / (k.M + 1);
    const auto op = assemble_spacetime(F, g);
    for (int i = 0; i < 100; ++i) {
      const Signal v = random_trig(g, 3, c.rng, 30);
      const double norm = stabilized_norm_sq(T, v, 0.0);
      const double E = stabilized_form(op, v, v, {0.0, delta, 0.0}).real();
      o.measured = std::max(o.measured, (delta * norm - E) / norm);
      ++o.samples;
    }
  }
  return o;
}

struct Manufactured {
  double err = 0.0, oracle = 0.0;
  std::size_t n = 0;
};

Manufactured manufactured(Ctx& c) {
  const TimeGrid g(1024, 16.0);
  Manufactured m;
  for (std::size_t fam = 0; fam < c.count(3); ++fam) {
    const GelfandTriple T(random_spd(2, c.rng, 20));
    const auto F = random_smooth_family(T, c.rng, 1.0, 4.0, 0.3, 3, g.period() / 2);
    const Signal ustar = random_trig(g, 2, c.rng, 12);
    const Signal f = time_derivative(ustar) + assemble_spacetime(F, g).apply(ustar);
    SolveConfig cfg(g);
    cfg.measure_stabilized = false;
    const auto sol = solve_line_weak(F, f, cfg);
    m.err = std::max(m.err, l2_h_gamma_norm(T, sol.u - ustar, 1.0) / l2_h_gamma_norm(T, ustar, 1.0));
    const Signal cn = crank_nicolson_periodic(F.sampler(), spectral_interpolant(f), g, 2, 4, true);
    m.oracle = std::max(m.oracle, max_abs(cn - sol.u) / max_abs(sol.u));
    ++m.n;
  }
  return m;
}

std::vector<Outcome> manufactured_group(Ctx& c) {
  const auto m = manufactured(c);
  return {{m.err, m.n, {}}, {m.oracle, m.n, {}}};
}

Outcome causality(Ctx& c) {
  const TimeGrid g(2048, 48.0);
  Outcome o;
  for (std::size_t i = 0; i < c.count(20); ++i) {
    const GelfandTriple T(random_spd(2, c.rng, 10));
    const auto F = random_smooth_family(T, c.rng, 1.0, 4.0, 0.3, 3, g.period() / 2);
    // Packet cut off smoothly to [0.5, 5.5] (zero before t = 0).
    MatrixXcd v = random_packet(g, 2, c.rng, 1.0, 3.0).values();
    for (std::size_t k = 0; k < g.size(); ++k) {
      const double t = g.time(k);
      v.row(static_cast<Eigen::Index>(k)) *= smooth_step((0.5 - t) / 0.5) * smooth_step((t - 5.5) / 0.5);
    }
    const Signal f(g, v);
    SolveConfig cfg(g);
    cfg.measure_stabilized = false;
    const auto r = causality_check(F, f, solve_line_weak(F, f, cfg), 0.0);
    o.measured = std::max(o.measured, r.ratio);
    ++o.samples;
  }
  return o;
}

Outcome interpolation(Ctx& c) {
  const TimeGrid g(128, 10.0);
  Outcome o;
  o.measured = -1e300;
  // (alpha, delta) = (0.5, 0.25) lies outside the admissible range.
  const std::pair<double, double> cases[] = {{0.2, 0.0}, {0.2, 0.25}, {0.5, 0.0}};
  for (std::size_t i = 0; i < c.count(500); ++i) {
    const GelfandTriple T(random_spd(1 + static_cast<Eigen::Index>(i % 6), c.rng, 1e3));
    const Signal u = random_trig(g, T.dim(), c.rng, 20);
    const auto [a, d] = cases[i % 3];
    const auto r = interpolation_inequality_check(u, a, d, T);
    o.measured = std::max(o.measured, -r.slack / r.rhs);
    ++o.samples;
  }
  return o;
}

struct IvpStats {
  double decay = 0.0, energy = 0.0, trace = 0.0;
  std::size_t n = 0;
};

IvpStats ivp(Ctx& c) {
  IvpStats s;
  for (std::size_t i = 0; i < c.count(20); ++i) {
    const GelfandTriple T(random_spd(2 + static_cast<Eigen::Index>(i % 2), c.rng, 10));
    const auto d = T.dim();
    {
      const MatrixXcd A = random_coercive_matrix(T, 1.0, 4.0, c.rng);
      const MatrixXcd H = 0.5 * (A + A.adjoint());
      const auto F = NonAutonomousForm::autonomous(T, H);
      Eigen::SelfAdjointEigenSolver<MatrixXcd> es(H);
      const auto j = static_cast<Eigen::Index>(i % static_cast<std::size_t>(d));
      const VectorXcd u0 = es.eigenvectors().col(j);
      const TimeGrid g = ivp_grid(1.0, 1024, F);
      SolveConfig cfg(g);
      cfg.measure_stabilized = false;
      const auto sol = solve_ivp(F, Signal::zeros(g, d), u0, cfg);
      for (std::size_t k = g.window_first(); k <= g.window_last(); ++k)
        s.decay = std::max(s.decay, (sol.u.at(k) - std::exp(-es.eigenvalues()(j) * g.time(k)) * u0).norm());
    }
    {
      const auto F = random_smooth_family(T, c.rng, 1.0, 4.0, 0.3, 3, 1.0);
      const TimeGrid g = ivp_grid(1.0, 1024, F);
      const Signal f = random_on_window(g, d, c.rng);
      const VectorXcd u0 = random_complex(d, 1, c.rng).col(0);
      SolveConfig cfg(g);
      cfg.measure_stabilized = false;
      cfg.alpha = i % 2 ? 0.5 : 0.0;
      const auto sol = solve_ivp(F, f, u0, cfg);
      s.energy = std::max(s.energy, energy_balance(F, f, sol, u0).relative_error);
      s.trace = std::max(s.trace, sol.trace->start_error / u0.norm());
    }
    ++s.n;
  }
  return s;
}

std::vector<Outcome> ivp_group(Ctx& c) {
  const auto s = ivp(c);
  return {{s.decay, s.n, {}}, {s.energy, s.n, {}}, {s.trace, s.n, {}}};
}

Outcome stability(Ctx&) {
  const nlohmann::json j = {{"problem", "elliptic_1d"},
                            {"n_x", 16},
                            {"a0", 2.0},
                            {"b", {{"mean", 0.6}, {"amp", 0.3}}},
                            {"profile", {{"kind", "weierstrass"}, {"s_target", 0.7}}}};
  const auto P = instance_from_json(j, 1.0);
  DataSpec f;
  f.spatial = "sine";
  const auto r = refinement_study(P, f, DataSpec{}, 1.0, {256, 512, 1024}, 0.5);
  return {std::max(r.variation_du, r.variation_half), r.rows.size(), r.to_json()};
}

Outcome lambda1(Ctx&) {
  const auto P = build_elliptic_1d(CoefficientField::constant(1.0), 256);
  return {rel(first_eigenvalue(P), kPi * kPi), 1, {}};
}

Outcome frac_symbol(Ctx&) {
  const std::size_t n = 512;
  const auto P = build_frac_laplacian_1d(CoefficientField::constant(1.0), 0.25, n);
  const MatrixXcd A = P.form.at(0.0);
  const double k = 2 * kPi;
  VectorXcd v(static_cast<Eigen::Index>(n));
  for (std::size_t j = 0; j < n; ++j)
    v(static_cast<Eigen::Index>(j)) = std::polar(1.0 / std::sqrt(double(n)), k * double(j) / double(n));
  const double rq = v.dot(A * v).real();
  // Truncated symbol: int_{-1/2}^{1/2} 2 (1 - cos kz) |z|^{-3/2} dz.
  boost::math::quadrature::tanh_sinh<double> ts;
  const double acc = ts.integrate(
      [k](double z) {
        if (k * z < 1e-4) return 2 * k * k * std::sqrt(z);
        return 8 * std::pow(std::sin(k * z / 2), 2) / std::pow(z, 1.5);
      },
      0.0, 0.5);
  return {rel(rq, acc), 1, {{"rayleigh", rq}, {"oracle", acc}}};
}

using GroupFn = std::function<std::vector<Outcome>(Ctx&)>;

// Checks sharing one computation form a group; the group index seeds its generator.
struct Group {
  std::vector<CheckInfo> checks;
  GroupFn fn;
};

GroupFn single(Outcome (*f)(Ctx&)) {
  return [f](Ctx& c) { return std::vector<Outcome>{f(c)}; };
}

const std::vector<Group>& registry() {
  static const std::vector<Group> r = {
      {{{"spectral.isometry", "Gagliardo seminorm equals C_alpha times the fractional derivative energy", 1e-4}},
       single(isometry)},
      {{{"spectral.c_half", "isometry constant at alpha = 1/2 equals 2 pi", 1e-8}}, single(c_half)},
      {{{"spectral.hardy", "Hardy inequality ratio under the constant-extension bound", 11.0}}, single(hardy)},
      {{{"gelfand.kato_envelope", "two-sided Kato bound for fractional powers of coercive forms", 0.0}},
       single(kato)},
      {{{"nonauto.commutator", "commutator estimate for multiplication by a coefficient", 1.0}}, single(commutator)},
      {{{"solver.stabilized_coercivity", "coercivity of the Hilbert-stabilized weak form", 1e-9}},
       single(coercivity)},
      {{{"solver.manufactured", "manufactured solution recovery on the line", 1e-8},
        {"solver.cn_oracle", "collocation agrees with the Crank-Nicolson oracle", 1e-5}},
       manufactured_group},
      {{{"solver.causality", "no solution mass before the forcing switches on", 1e-6}}, single(causality)},
      {{{"solver.interpolation", "interpolation inequality for fractional time derivatives", 1e-9}},
       single(interpolation)},
      {{{"solver.ivp_decay", "eigenvector decay on an interval", 1e-6},
        {"solver.ivp_energy", "energy identity on an interval", 1e-6},
        {"solver.ivp_trace", "initial trace u(0) = u0", 1e-8}},
       ivp_group},
      {{{"examples.stability", "maximal-regularity norms stable under refinement for a smooth-enough profile", 0.2}},
       single(stability)},
      {{{"examples.lambda1", "lowest Dirichlet eigenvalue near pi^2", 1e-3}}, single(lambda1)},
      {{{"examples.frac_symbol", "fractional form on a Fourier mode matches the truncated symbol", 0.02}},
       single(frac_symbol)},
  };
  return r;
}

std::string fmt(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.9e", x);
  return buf;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"") == std::string::npos) return s;
  std::string out = "\"";
  for (char ch : s) out += ch == '"' ? std::string("\"\"") : std::string(1, ch);
  return out + "\"";
}

}  // namespace

const std::vector<CheckInfo>& verify_checks() {
  static const std::vector<CheckInfo> v = [] {
    std::vector<CheckInfo> out;
    for (const auto& g : registry()) out.insert(out.end(), g.checks.begin(), g.checks.end());
    return out;
  }();
  return v;
}

namespace {

bool known(const std::string& id) {
  return std::any_of(verify_checks().begin(), verify_checks().end(), [&](const CheckInfo& c) { return c.id == id; });
}

std::vector<CheckResult> run_group(std::size_t gi, const VerifyOptions& opt) {
  const Group& g = registry()[gi];
  std::seed_seq seq{static_cast<std::uint32_t>(opt.seed), static_cast<std::uint32_t>(opt.seed >> 32),
                    static_cast<std::uint32_t>(gi)};
  Ctx ctx{Rng(seq), opt.sample_scale};
  const std::vector<Outcome> o = g.fn(ctx);
  std::vector<CheckResult> out;
  for (std::size_t k = 0; k < g.checks.size(); ++k) {
    CheckResult res;
    res.id = g.checks[k].id;
    res.anchor = g.checks[k].anchor;
    res.tolerance = g.checks[k].tolerance;
    if (auto t = opt.tolerances.find(res.id); t != opt.tolerances.end()) res.tolerance = t->second;
    if (opt.tolerance_all) res.tolerance = *opt.tolerance_all;
    res.measured = o[k].measured;
    res.samples = o[k].samples;
    res.detail = o[k].detail;
    res.pass = std::isfinite(res.measured) && res.measured <= res.tolerance;
    out.push_back(std::move(res));
  }
  return out;
}

}  // namespace

CheckResult run_check(const std::string& id, const VerifyOptions& opt) {
  if (!known(id)) throw ConfigError("unknown check '" + id + "'");
  for (std::size_t gi = 0; gi < registry().size(); ++gi)
    for (const auto& c : registry()[gi].checks)
      if (c.id == id)
        for (auto& r : run_group(gi, opt))
          if (r.id == id) return r;
  throw ConfigError("unknown check '" + id + "'");
}

std::vector<CheckResult> run_verify(const VerifyOptions& opt) {
  for (const auto& id : opt.only)
    if (!known(id)) throw ConfigError("unknown check '" + id + "' in field 'checks'");
  auto wanted = [&](const std::string& id) {
    return opt.only.empty() || std::find(opt.only.begin(), opt.only.end(), id) != opt.only.end();
  };
  std::vector<std::size_t> groups;
  for (std::size_t gi = 0; gi < registry().size(); ++gi)
    if (std::any_of(registry()[gi].checks.begin(), registry()[gi].checks.end(),
                    [&](const CheckInfo& c) { return wanted(c.id); }))
      groups.push_back(gi);
  std::vector<std::vector<CheckResult>> parts(groups.size());
  parallel_for(groups.size(), [&](std::size_t i) { parts[i] = run_group(groups[i], opt); });
  std::vector<CheckResult> out;
  for (auto& p : parts)
    for (auto& r : p)
      if (wanted(r.id)) out.push_back(std::move(r));
  return out;
}

std::string verify_csv(const std::vector<CheckResult>& results) {
  std::string s = "check_id,anchor,measured,tolerance,slack,pass,samples\n";
  for (const auto& r : results)
    s += r.id + "," + csv_field(r.anchor) + "," + fmt(r.measured) + "," + fmt(r.tolerance) + "," + fmt(r.slack()) +
         "," + (r.pass ? "1" : "0") + "," + std::to_string(r.samples) + "\n";
  return s;
}

VerifyOptions verify_options_from_json(const nlohmann::json& j, std::uint64_t seed) {
  VerifyOptions o;
  o.seed = seed;
  try {
    if (j.contains("sample_scale")) {
      o.sample_scale = j.at("sample_scale").get<double>();
      if (!(o.sample_scale > 0.0 && o.sample_scale <= 10.0))
        throw ConfigError("field 'sample_scale' must lie in (0, 10]");
    }
    if (j.contains("checks")) o.only = j.at("checks").get<std::vector<std::string>>();
    if (j.contains("tolerances")) o.tolerances = j.at("tolerances").get<std::map<std::string, double>>();
    if (j.contains("tolerance_override")) o.tolerance_all = j.at("tolerance_override").get<double>();
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("verify config has a field of the wrong type: ") + e.what());
  }
  for (const auto& [id, v] : o.tolerances) {
    if (!known(id))
      throw ConfigError("unknown check '" + id + "' in field 'tolerances'");
    if (!std::isfinite(v)) throw ConfigError("tolerance for '" + id + "' is not finite");
  }
  return o;
}

}  // namespace mreg
