#include "mreg/study.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "mreg/errors.hpp"

namespace mreg {

namespace {

constexpr double kPi = std::numbers::pi;

double time_factor(const std::string& kind, double t, double T) {
  if (kind == "constant") return 1.0;
  if (kind == "cos") return std::cos(2 * kPi * t / T);
  if (kind == "ramp") return t / T;
  throw ConfigError("unknown time factor '" + kind + "'");
}

}  // namespace

nlohmann::json DataSpec::to_json() const {
  return {{"spatial", spatial}, {"amplitude", amplitude}, {"time", time}};
}

DataSpec data_spec_from_json(const nlohmann::json& j, const char* field) {
  if (!j.contains(field)) throw ConfigError(std::string("missing field '") + field + "'");
  const auto& v = j.at(field);
  DataSpec s;
  try {
    if (v.is_string()) {
      s.spatial = v.get<std::string>();
    } else if (v.is_object()) {
      s.spatial = v.value("spatial", std::string("zero"));
      s.amplitude = v.value("amplitude", 1.0);
      s.time = v.value("time", std::string("constant"));
    } else {
      throw ConfigError(std::string("field '") + field + "' must be a string or an object");
    }
  } catch (const nlohmann::json::exception&) {
    throw ConfigError(std::string("field '") + field + "' has entries of the wrong type");
  }
  for (const char* k : {"zero", "first_mode", "sine", "ones"})
    if (s.spatial == k) {
      if (!std::isfinite(s.amplitude)) throw ConfigError(std::string("field '") + field + "' amplitude is not finite");
      time_factor(s.time, 0.0, 1.0);
      return s;
    }
  throw ConfigError(std::string("field '") + field + "' has unknown spatial kind '" + s.spatial + "'");
}

Eigen::VectorXcd spatial_vector(const ProblemInstance& P, const std::string& kind) {
  const auto d = P.form.dim();
  if (kind == "zero") return Eigen::VectorXcd::Zero(d);
  if (kind == "first_mode") {
    const Eigen::MatrixXcd A = P.form.at(0.0);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(0.5 * (A + A.adjoint()));
    return es.eigenvectors().col(0);
  }
  if (kind != "ones" && kind != "sine") throw ConfigError("unknown spatial kind '" + kind + "'");
  Eigen::VectorXcd v(d);
  const bool torus = P.label == "frac_laplacian_1d";
  const Eigen::Index comps = P.label == "system_1d" ? 2 : 1;
  const Eigen::Index m = d / comps;
  for (Eigen::Index c = 0; c < comps; ++c)
    for (Eigen::Index j = 0; j < m; ++j) {
      // Interior nodes x_j = (j+1)/(m+1) on (0,1); torus nodes x_j = j/m.
      const double x = torus ? double(j) / double(m) : double(j + 1) / double(m + 1);
      v(c * m + j) = kind == "ones" ? 1.0 : (torus ? std::sin(2 * kPi * x) : std::sin(kPi * x));
    }
  return v / v.norm();
}

double first_eigenvalue(const ProblemInstance& P) {
  const Eigen::MatrixXcd A = P.form.at(0.0);
  return Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd>(0.5 * (A + A.adjoint())).eigenvalues()(0);
}

Eigen::VectorXcd initial_value(const ProblemInstance& P, const DataSpec& s) {
  return s.amplitude * spatial_vector(P, s.spatial);
}

Signal forcing_signal(const ProblemInstance& P, const DataSpec& s, const TimeGrid& grid) {
  if (!grid.has_window()) throw StructuralError("forcing needs a grid with an interval window");
  const Eigen::VectorXcd v = s.amplitude * spatial_vector(P, s.spatial);
  const auto& w = grid.window();
  Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(static_cast<Eigen::Index>(grid.size()), v.size());
  for (std::size_t k = grid.window_first(); k <= grid.window_last(); ++k)
    out.row(static_cast<Eigen::Index>(k)) = time_factor(s.time, grid.time(k) - w.a, w.length()) * v.transpose();
  return Signal(grid, out);
}

nlohmann::json StudyRow::to_json() const {
  return {{"n", n},          {"torus_nodes", torus_nodes}, {"du_L2H", du_L2H},         {"u_HhalfV", u_HhalfV},
          {"mr", mr},        {"start_error", start_error}, {"tail_ratio", tail_ratio}, {"method", method}};
}

nlohmann::json StudyResult::to_json() const {
  nlohmann::json r = nlohmann::json::array();
  for (const auto& x : rows) r.push_back(x.to_json());
  return {{"rows", r}, {"variation_du", variation_du}, {"variation_half", variation_half}};
}

double relative_variation(const std::vector<double>& v) {
  if (v.empty()) return 0.0;
  const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
  return *lo > 0 ? (*hi - *lo) / *lo : (*hi > 0 ? INFINITY : 0.0);
}

StudyRow row_from_solution(const WeakSolution& sol, std::size_t n) {
  StudyRow r;
  r.n = n;
  r.torus_nodes = sol.u.grid().size();
  r.du_L2H = sol.norms.at("I.du.L2(H)");
  r.u_HhalfV = sol.norms.at("I.u.Hhalf(V)");
  r.mr = sol.norms.at("I.MR");
  r.start_error = sol.trace ? sol.trace->start_error : 0.0;
  r.tail_ratio = sol.norms.at("tail_ratio");
  r.method = sol.method;
  return r;
}

StudyRow study_point(const ProblemInstance& P, const DataSpec& f, const DataSpec& u0, double T, std::size_t n,
                     double alpha) {
  const TimeGrid g = ivp_grid(T, n, P.form);
  SolveConfig cfg(g);
  cfg.alpha = alpha;
  cfg.measure_stabilized = false;
  return row_from_solution(solve_ivp(P.form, forcing_signal(P, f, g), initial_value(P, u0), cfg), n);
}

StudyResult refinement_study(const ProblemInstance& P, const DataSpec& f, const DataSpec& u0, double T,
                             const std::vector<std::size_t>& ns, double alpha) {
  if (ns.empty()) throw ConfigError("refinement study needs at least one grid size");
  StudyResult out;
  std::vector<double> du, half;
  for (std::size_t n : ns) {
    out.rows.push_back(study_point(P, f, u0, T, n, alpha));
    du.push_back(out.rows.back().du_L2H);
    half.push_back(out.rows.back().u_HhalfV);
  }
  out.variation_du = relative_variation(du);
  out.variation_half = relative_variation(half);
  return out;
}

}  // namespace mreg
