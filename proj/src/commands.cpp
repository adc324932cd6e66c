#include "mreg/commands.hpp"

#include <cmath>
#include <ostream>

#include <nlohmann/json.hpp>

#include "mreg/errors.hpp"
#include "mreg/examples.hpp"
#include "mreg/nonauto_form.hpp"
#include "mreg/parallel.hpp"
#include "mreg/report.hpp"
#include "mreg/solver.hpp"
#include "mreg/study.hpp"
#include "mreg/verify.hpp"

namespace mreg {

namespace {

using nlohmann::json;

struct Loaded {
  std::string bytes, name;
  json j = json::object();
};

Loaded load_config(const RunConfig& rc, bool required) {
  Loaded l;
  if (rc.config_path.empty()) {
    if (required) throw ConfigError("--config is required for '" + rc.command + "'");
    l.name = "(defaults)";
    return l;
  }
  l.bytes = read_file(rc.config_path);
  l.name = rc.config_path.filename().string();
  try {
    l.j = json::parse(l.bytes);
  } catch (const json::parse_error& e) {
    throw ConfigError("config is not valid JSON: " + std::string(e.what()));
  }
  if (!l.j.is_object()) throw ConfigError("config must be a JSON object");
  return l;
}

template <class T>
T get(const json& j, const char* key) {
  if (!j.contains(key)) throw ConfigError(std::string("missing field '") + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError(std::string("field '") + key + "' has the wrong type");
  }
}

template <class T>
T get_or(const json& j, const char* key, T fallback) {
  return j.contains(key) ? get<T>(j, key) : fallback;
}

double get_T(const json& j) {
  const double T = get_or(j, "T", 1.0);
  if (!(T > 0.0 && std::isfinite(T))) throw ConfigError("field 'T' must be positive");
  return T;
}

double get_alpha(const json& j, double fallback) {
  const double a = get_or(j, "alpha", fallback);
  if (!(a >= 0.0 && a < 1.0)) throw ConfigError("field 'alpha' must lie in [0, 1)");
  return a;
}

std::vector<std::size_t> get_grids(const json& j, const char* key) {
  const auto g = get<std::vector<std::size_t>>(j, key);
  if (g.empty()) throw ConfigError(std::string("field '") + key + "' must not be empty");
  for (auto n : g)
    if (n < 16 || n > 16384) throw ConfigError(std::string("field '") + key + "' entries must lie in [16, 16384]");
  return g;
}

// The problem is either declared inline ("problem": "<kind>" beside its fields) or as a nested object.
json problem_json(const json& j) {
  if (!j.contains("problem")) throw ConfigError("missing field 'problem'");
  return j.at("problem").is_object() ? j.at("problem") : j;
}

ProblemInstance problem(const json& j, double T) { return instance_from_json(problem_json(j), T); }

DataSpec data_or_zero(const json& j, const char* key) {
  return j.contains(key) ? data_spec_from_json(j, key) : DataSpec{};
}

LinearSolverOptions linear_options(const json& j) {
  LinearSolverOptions o;
  if (!j.contains("linear")) return o;
  const json& l = j.at("linear");
  if (!l.is_object()) throw ConfigError("field 'linear' must be an object");
  const auto kind = get_or<std::string>(l, "kind", "automatic");
  if (kind == "automatic") o.kind = LinearSolverKind::automatic;
  else if (kind == "direct") o.kind = LinearSolverKind::direct;
  else if (kind == "iterative") o.kind = LinearSolverKind::iterative;
  else throw ConfigError("field 'linear.kind' must be automatic, direct or iterative");
  o.tol = get_or(l, "tol", o.tol);
  o.max_iter = get_or(l, "max_iter", o.max_iter);
  o.restart = get_or(l, "restart", o.restart);
  return o;
}

CsvTable study_table(const std::vector<StudyRow>& rows, const std::vector<std::string>& lead_header,
                     const std::vector<std::vector<std::string>>& lead) {
  std::vector<std::string> h = lead_header;
  for (const char* c : {"n", "torus_nodes", "du_L2H", "u_HhalfV", "mr", "start_error", "tail_ratio", "method"})
    h.push_back(c);
  CsvTable t(h);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& r = rows[i];
    std::vector<std::string> c = lead.empty() ? std::vector<std::string>{} : lead[i];
    for (auto x : {std::to_string(r.n), std::to_string(r.torus_nodes)}) c.push_back(x);
    for (double x : {r.du_L2H, r.u_HhalfV, r.mr, r.start_error, r.tail_ratio}) c.push_back(format_number(x));
    c.push_back(r.method);
    t.add_row(c);
  }
  return t;
}

// ---------------------------------------------------------------- verify

int verify(const RunConfig& rc, std::ostream& out, std::ostream& err) {
  const Loaded l = load_config(rc, false);
  const VerifyOptions opt = verify_options_from_json(l.j, rc.seed);
  Bundle b(rc.out_dir, "verify", l.bytes, l.name, rc.seed);
  const auto results = run_verify(opt);
  b.add("verify.csv", verify_csv(results));
  json detail = json::array();
  std::vector<std::string> failed;
  for (const auto& r : results) {
    detail.push_back({{"id", r.id}, {"anchor", r.anchor}, {"measured", r.measured}, {"tolerance", r.tolerance},
                      {"pass", r.pass}, {"samples", r.samples}, {"detail", r.detail}});
    if (!r.pass) failed.push_back(r.id);
    if (rc.verbosity > 0)
      out << (r.pass ? "PASS " : "FAIL ") << r.id << "  measured " << format_number(r.measured) << " tolerance "
          << format_number(r.tolerance) << "\n";
  }
  b.add("verify.json", detail.dump(2) + "\n");
  b.finish({{"checks", results.size()}, {"failed", failed}});
  if (!failed.empty()) {
    err << failed.size() << " check(s) failed:\n";
    for (const auto& r : results)
      if (!r.pass) err << "  " << r.id << ": " << r.anchor << "\n";
    return kExitCheckFailure;
  }
  return kExitOk;
}

// ---------------------------------------------------------------- solve

int solve(const RunConfig& rc, std::ostream& out, std::ostream& err) {
  const Loaded l = load_config(rc, true);
  const json& j = l.j;
  const double T = get_T(j);
  const auto P = problem(j, T);
  const DataSpec u0s = data_spec_from_json(j, "u0");
  const DataSpec fs = data_or_zero(j, "f");
  const auto n = get_or<std::size_t>(j, "n", 512);
  if (n < 16 || n > 16384) throw ConfigError("field 'n' must lie in [16, 16384]");
  const double alpha = get_alpha(j, 0.0);

  Bundle b(rc.out_dir, "solve", l.bytes, l.name, rc.seed);
  const TimeGrid g = ivp_grid(T, n, P.form);
  SolveConfig cfg(g);
  cfg.alpha = alpha;
  cfg.linear = linear_options(j);
  cfg.measure_stabilized = get_or(j, "measure_stabilized", false);
  cfg.oracle.enabled = get_or(j, "oracle", false);
  const Signal f = forcing_signal(P, fs, g);
  const Eigen::VectorXcd u0 = initial_value(P, u0s);
  WeakSolution sol = [&] {
    try {
      return solve_ivp(P.form, f, u0, cfg);
    } catch (const SolverDivergence& e) {
      json h = {{"error", e.what()}, {"residual_history", e.history}};
      b.add("failure.json", h.dump(2) + "\n");
      b.finish({{"status", "numerical failure"}});
      throw;
    }
  }();

  const TimeGrid& sg = sol.u.grid();
  const auto d = P.form.dim();
  std::vector<std::string> h{"t", "norm_H"};
  for (Eigen::Index c = 0; c < d; ++c) {
    h.push_back("re_" + std::to_string(c));
    h.push_back("im_" + std::to_string(c));
  }
  CsvTable st(h);
  // Decay reference: first mode, no forcing, time-independent form.
  const bool decay = u0s.spatial == "first_mode" && fs.spatial == "zero" && P.form.is_autonomous();
  const double lambda1 = decay ? first_eigenvalue(P) : 0.0;
  CsvTable dt({"t", "norm_H", "reference", "abs_error"});
  double decay_err = 0.0;
  for (std::size_t k = sg.window_first(); k <= sg.window_last(); ++k) {
    const double t = sg.time(k) - sg.window().a;
    const Eigen::VectorXcd u = sol.u.at(k);
    std::vector<std::string> row{format_number(t), format_number(u.norm())};
    for (Eigen::Index c = 0; c < d; ++c) {
      row.push_back(format_number(u(c).real()));
      row.push_back(format_number(u(c).imag()));
    }
    st.add_row(row);
    if (decay) {
      const double ref = std::abs(u0s.amplitude) * std::exp(-lambda1 * t);
      const double e = (u - std::exp(-lambda1 * t) * u0).norm();
      decay_err = std::max(decay_err, e);
      dt.add_row({format_number(t), format_number(u.norm()), format_number(ref), format_number(e)});
    }
  }
  b.add("solution.csv", st.str());
  if (decay) b.add("decay.csv", dt.str());
  CsvTable nt({"name", "value"});
  for (const auto& [k, v] : sol.norms) nt.add_row({k, format_number(v)});
  b.add("norms.csv", nt.str());
  if (sol.trace) b.add("trace.json", sol.trace->to_json().dump(2) + "\n");
  json summary = sol.to_json();
  summary["problem"] = P.notes;
  summary["label"] = P.label;
  if (decay) {
    summary["lambda1"] = lambda1;
    summary["decay_max_error"] = decay_err;
  }

  if (j.contains("refinement")) {
    const auto ns = get_grids(j, "refinement");
    const auto r = refinement_study(P, fs, u0s, T, ns, alpha);
    b.add("refinement.csv", study_table(r.rows, {}, {}).str());
    std::vector<double> x, du, half;
    for (const auto& row : r.rows) {
      x.push_back(double(row.n));
      du.push_back(row.du_L2H);
      half.push_back(row.u_HhalfV);
    }
    b.add("refinement.svg", svg_plot({"norms under refinement", "n", "norm", true, false},
                                     {{"||u'||_L2(H)", x, du}, {"||u||_H1/2(V)", x, half}}));
    summary["refinement"] = r.to_json();
    if (rc.verbosity > 0)
      out << "refinement variation: u' " << format_number(r.variation_du) << ", H^1/2 "
          << format_number(r.variation_half) << "\n";
  }
  b.add("solve.json", summary.dump(2) + "\n");
  b.finish({{"label", P.label}, {"n", n}, {"alpha", alpha}, {"warnings", sol.warnings}});
  // Hypothesis warnings do not change the exit status; they are surfaced here and in the manifest.
  for (const auto& w : sol.warnings) err << "warning: " << w << "\n";
  if (rc.verbosity > 0) {
    out << "solved " << P.label << " (d = " << d << ", n = " << n << ", torus " << sg.size() << ")\n";
    if (decay) out << "decay max error " << format_number(decay_err) << "\n";
  }
  return kExitOk;
}

// ---------------------------------------------------------------- sweep

json with_s_target(json problem, double s, const std::string& kind) {
  json prof = problem.contains("profile") ? problem["profile"] : json::object();
  prof["kind"] = kind;
  prof["s_target"] = s;
  problem["profile"] = prof;
  return problem;
}

int sweep(const RunConfig& rc, std::ostream& out, std::ostream&) {
  const Loaded l = load_config(rc, true);
  const json& j = l.j;
  const double T = get_T(j);
  const auto svals = get<std::vector<double>>(j, "s_target");
  if (svals.empty()) throw ConfigError("field 's_target' must not be empty");
  const auto grids = get_grids(j, "grids");
  const double alpha = get_alpha(j, 0.5);
  const DataSpec fs = data_or_zero(j, "f");
  const DataSpec u0s = data_or_zero(j, "u0");
  const json base = problem_json(j);
  const std::string kind =
      get_or<std::string>(j, "profile_kind", base.contains("profile") ? base["profile"].value("kind", "weierstrass")
                                                                       : std::string("weierstrass"));
  std::vector<ProblemInstance> probs;
  for (double s : svals) probs.push_back(instance_from_json(with_s_target(base, s, kind), T));

  Bundle b(rc.out_dir, "sweep", l.bytes, l.name, rc.seed);
  const std::size_t np = svals.size() * grids.size();
  std::vector<StudyRow> rows(np);
  std::vector<std::string> errors(np);
  // Each point is an isolated solve; results land in their own slot.
  parallel_for(np, [&](std::size_t i) {
    try {
      rows[i] = study_point(probs[i / grids.size()], fs, u0s, T, grids[i % grids.size()], alpha);
    } catch (const std::exception& e) {
      errors[i] = e.what();
    }
  });
  for (std::size_t i = 0; i < np; ++i)
    if (!errors[i].empty())
      throw NumericalError("sweep point s = " + format_number(svals[i / grids.size()]) +
                           ", n = " + std::to_string(grids[i % grids.size()]) + ": " + errors[i]);

  std::vector<std::vector<std::string>> lead;
  for (std::size_t i = 0; i < np; ++i) lead.push_back({format_number(svals[i / grids.size()])});
  b.add("sweep.csv", study_table(rows, {"s_target"}, lead).str());

  CsvTable th({"s_target", "regime", "variation_du", "variation_half", "du_L2H_finest", "u_HhalfV_finest"});
  std::vector<Series> curves;
  std::vector<double> sx, vdu, vhalf;
  json summary = json::array();
  for (std::size_t si = 0; si < svals.size(); ++si) {
    std::vector<double> x, du, half;
    for (std::size_t gi = 0; gi < grids.size(); ++gi) {
      const auto& r = rows[si * grids.size() + gi];
      x.push_back(double(r.n));
      du.push_back(r.du_L2H);
      half.push_back(r.u_HhalfV);
    }
    const double a = relative_variation(du), c = relative_variation(half);
    const std::string regime = svals[si] > 0.5 ? "smooth" : "rough";
    th.add_row({format_number(svals[si]), regime, format_number(a), format_number(c), format_number(du.back()),
                format_number(half.back())});
    curves.push_back({"s = " + format_number(svals[si]).substr(0, 5), x, half});
    sx.push_back(svals[si]);
    vdu.push_back(a);
    vhalf.push_back(c);
    summary.push_back({{"s_target", svals[si]}, {"regime", regime}, {"variation_du", a}, {"variation_half", c}});
    if (rc.verbosity > 0)
      out << "s_target " << svals[si] << " (" << regime << "): variation u' " << format_number(a) << ", H^1/2 "
          << format_number(c) << "\n";
  }
  b.add("threshold.csv", th.str());
  b.add("sweep.svg", svg_plot({"||u||_H1/2(V) under refinement", "n", "norm", true, false}, curves));
  b.add("threshold.svg",
        svg_plot({"refinement variation against s_target", "s_target", "relative variation", false, false},
                 {{"u' in L2(H)", sx, vdu}, {"u in H1/2(V)", sx, vhalf}}));
  b.finish({{"points", np}, {"threshold", summary}});
  return kExitOk;
}

// ---------------------------------------------------------------- report

int report(const RunConfig& rc, std::ostream& out, std::ostream&) {
  const Loaded l = load_config(rc, true);
  const json& j = l.j;
  const double T = get_T(j);
  const auto P = problem(j, T);
  const auto grids = get_grids(j, "grids");
  const double alpha = get_alpha(j, 0.5);
  const DataSpec fs = data_or_zero(j, "f");
  const DataSpec u0s = data_or_zero(j, "u0");
  const auto band_s = get_or<std::vector<double>>(j, "band_s", {0.3, 0.5, 0.7});
  for (double s : band_s)
    if (!(s > 0.0 && s < 1.0)) throw ConfigError("field 'band_s' entries must lie in (0,1)");

  Bundle b(rc.out_dir, "report", l.bytes, l.name, rc.seed);
  const auto study = refinement_study(P, fs, u0s, T, grids, alpha);
  b.add("norms.csv", study_table(study.rows, {}, {}).str());
  std::vector<double> x, du, half, mr;
  for (const auto& r : study.rows) {
    x.push_back(double(r.n));
    du.push_back(r.du_L2H);
    half.push_back(r.u_HhalfV);
    mr.push_back(r.mr);
  }
  b.add("norms.svg", svg_plot({"norms under refinement", "n", "norm", true, false},
                              {{"||u'||_L2(H)", x, du}, {"||u||_H1/2(V)", x, half}, {"MR", x, mr}}));

  // Dyadic band profile of the coefficient's time regularity.
  const TimeGrid bg = make_padded_grid(T, grids.back(), T);
  CsvTable bt({"s", "band", "lo", "hi", "contribution"});
  std::vector<Series> curves;
  json slopes = json::object();
  for (double s : band_s) {
    const auto r = form_regularity(P.form, s, 2.0, bg);
    Series c{"s = " + format_number(s).substr(0, 5), {}, {}};
    for (std::size_t m = 0; m < r.bands.size(); ++m) {
      bt.add_row({format_number(s), std::to_string(m), format_number(r.bands[m].lo), format_number(r.bands[m].hi),
                  format_number(r.bands[m].contribution)});
      c.x.push_back(r.bands[m].hi);
      c.y.push_back(r.bands[m].contribution);
    }
    curves.push_back(c);
    slopes[format_number(s)] = r.fine_slope;
  }
  b.add("bands.csv", bt.str());
  b.add("bands.svg", svg_plot({"coefficient band profile", "band scale |t-s|", "contribution", true, true}, curves));
  b.finish({{"label", P.label},
            {"variation_du", study.variation_du},
            {"variation_half", study.variation_half},
            {"fine_slopes", slopes}});
  if (rc.verbosity > 0)
    out << "report for " << P.label << ": variation u' " << format_number(study.variation_du) << ", H^1/2 "
        << format_number(study.variation_half) << "\n";
  return kExitOk;
}

}  // namespace

int run_command(const RunConfig& rc, std::ostream& out, std::ostream& err) {
  try {
    if (rc.out_dir.empty()) throw ConfigError("--out is required");
    set_max_jobs(rc.jobs);
    if (rc.command == "verify") return verify(rc, out, err);
    if (rc.command == "solve") return solve(rc, out, err);
    if (rc.command == "sweep") return sweep(rc, out, err);
    if (rc.command == "report") return report(rc, out, err);
    throw ConfigError("unknown command '" + rc.command + "'");
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return kExitConfigError;
  } catch (const NumericalError& e) {
    err << "numerical failure: " << e.what() << "\n";
    return kExitNumericalFailure;
  } catch (const DataError& e) {
    // Bad coefficient or data values come from the config.
    err << "config error (data): " << e.what() << "\n";
    return kExitConfigError;
  } catch (const DomainError& e) {
    err << "config error (domain): " << e.what() << "\n";
    return kExitConfigError;
  } catch (const StructuralError& e) {
    err << "numerical failure (structure): " << e.what() << "\n";
    return kExitNumericalFailure;
  }
}

}  // namespace mreg
