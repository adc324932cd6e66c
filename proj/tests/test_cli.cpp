#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include <sys/wait.h>
#include <unistd.h>

#include <gtest/gtest.h>
#include <nlohmann/json.hpp>

#include "mreg/commands.hpp"
#include "mreg/report.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

const fs::path kConfigs = MREG_CONFIG_DIR;

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("mreg_cli_test_" + std::to_string(::getpid())) / name;
  fs::remove_all(p);
  fs::create_directories(p.parent_path());
  return p;
}

fs::path write_config(const std::string& name, const json& j) {
  const fs::path p = scratch(name + ".json");
  std::ofstream(p) << j.dump(2);
  return p;
}

struct Run {
  int code;
  std::string out, err;
};

Run run(const std::string& cmd, const fs::path& config, const fs::path& out_dir, std::uint64_t seed = 1) {
  mreg::RunConfig rc;
  rc.command = cmd;
  rc.config_path = config;
  rc.out_dir = out_dir;
  rc.seed = seed;
  std::ostringstream o, e;
  const int code = mreg::run_command(rc, o, e);
  return {code, o.str(), e.str()};
}

std::vector<std::vector<std::string>> read_csv(const fs::path& p) {
  std::vector<std::vector<std::string>> rows;
  std::ifstream in(p);
  for (std::string line; std::getline(in, line);) {
    std::vector<std::string> cells;
    std::stringstream ss(line);
    for (std::string c; std::getline(ss, c, ',');) cells.push_back(c);
    rows.push_back(cells);
  }
  return rows;
}

std::size_t column(const std::vector<std::string>& header, const std::string& name) {
  for (std::size_t i = 0; i < header.size(); ++i)
    if (header[i] == name) return i;
  ADD_FAILURE() << "no column " << name;
  return 0;
}

json rough_problem(double s) {
  return {{"problem", "elliptic_1d"},
          {"n_x", 16},
          {"a0", 2.0},
          {"b", {{"mean", 0.6}, {"amp", 0.3}}},
          {"profile", {{"kind", "weierstrass"}, {"s_target", s}}},
          {"alpha", 0.5},
          {"f", {{"spatial", "sine"}}},
          {"u0", {{"spatial", "zero"}}}};
}

}  // namespace

TEST(Cli, MissingU0NamesTheField) {
  json c = rough_problem(0.7);
  c.erase("u0");
  const auto r = run("solve", write_config("no_u0", c), scratch("no_u0"));
  EXPECT_EQ(r.code, mreg::kExitConfigError);
  EXPECT_NE(r.err.find("'u0'"), std::string::npos) << r.err;
}

TEST(Cli, EmptySTargetIsConfigError) {
  json c = rough_problem(0.7);
  c["s_target"] = json::array();
  c["grids"] = {256};
  const auto r = run("sweep", write_config("empty_s", c), scratch("empty_s"));
  EXPECT_EQ(r.code, mreg::kExitConfigError);
  EXPECT_NE(r.err.find("s_target"), std::string::npos) << r.err;
}

TEST(Cli, ConfigErrors) {
  EXPECT_EQ(run("solve", "", scratch("none")).code, mreg::kExitConfigError);
  EXPECT_EQ(run("solve", scratch("does_not_exist.json"), scratch("missing")).code, mreg::kExitConfigError);
  EXPECT_EQ(run("launch", "", scratch("cmd")).code, mreg::kExitConfigError);
  const fs::path bad = scratch("bad.json");
  std::ofstream(bad) << "{ not json";
  EXPECT_EQ(run("solve", bad, scratch("bad")).code, mreg::kExitConfigError);
  EXPECT_EQ(run("verify", write_config("unknown_check", {{"checks", {"no.such"}}}), scratch("uc")).code,
            mreg::kExitConfigError);
  json c = rough_problem(0.7);
  c["n_x"] = 2;
  const auto r = run("solve", write_config("nx", c), scratch("nx"));
  EXPECT_EQ(r.code, mreg::kExitConfigError);
  EXPECT_NE(r.err.find("n_x"), std::string::npos);
}

TEST(Cli, DivergenceIsNumericalFailureWithHistory) {
  json c = rough_problem(0.7);
  c["linear"] = {{"kind", "iterative"}, {"max_iter", 2}, {"restart", 2}};
  const fs::path out = scratch("diverge");
  EXPECT_EQ(run("solve", write_config("diverge", c), out).code, mreg::kExitNumericalFailure);
  json f = json::parse(mreg::read_file(out / "failure.json"));
  EXPECT_FALSE(f["residual_history"].empty());
}

TEST(Cli, TamperedToleranceFailsControlled) {
  const fs::path out = scratch("tampered");
  const auto r = run("verify", kConfigs / "verify_tampered.json", out);
  EXPECT_EQ(r.code, mreg::kExitCheckFailure);
  EXPECT_NE(r.err.find("spectral.isometry"), std::string::npos) << r.err;
  const auto rows = read_csv(out / "verify.csv");
  ASSERT_EQ(rows.size(), 3u);
  EXPECT_EQ(rows[0], (std::vector<std::string>{"check_id", "anchor", "measured", "tolerance", "slack", "pass",
                                               "samples"}));
  for (std::size_t i = 1; i < rows.size(); ++i) EXPECT_EQ(rows[i][5], "0");
}

TEST(Cli, VerifyIsByteDeterministic) {
  const json c = {{"sample_scale", 0.1},
                  {"checks", {"spectral.isometry", "spectral.hardy", "gelfand.kato_envelope", "solver.interpolation"}}};
  const fs::path cfg = write_config("det", c);
  const fs::path a = scratch("det_a"), b = scratch("det_b");
  ASSERT_EQ(run("verify", cfg, a, 7).code, 0);
  ASSERT_EQ(run("verify", cfg, b, 7).code, 0);
  for (const char* f : {"verify.csv", "verify.json", "manifest.json"})
    EXPECT_EQ(mreg::read_file(a / f), mreg::read_file(b / f)) << f;
  // A different seed draws different samples.
  const fs::path d = scratch("det_c");
  ASSERT_EQ(run("verify", cfg, d, 8).code, 0);
  EXPECT_NE(mreg::read_file(a / "verify.csv"), mreg::read_file(d / "verify.csv"));
}

TEST(Cli, ManifestTracesArtifacts) {
  const fs::path out = scratch("manifest");
  const fs::path cfg = kConfigs / "heat_eigen.json";
  ASSERT_EQ(run("solve", cfg, out, 3).code, 0);
  const json m = json::parse(mreg::read_file(out / "manifest.json"));
  EXPECT_EQ(m["schema_version"], mreg::kManifestSchema);
  EXPECT_EQ(m["seed"], 3);
  EXPECT_EQ(m["config"]["sha256"], mreg::sha256_hex(mreg::read_file(cfg)));
  std::size_t n = 0;
  for (const auto& a : m["artifacts"]) {
    EXPECT_EQ(a["sha256"], mreg::sha256_hex(mreg::read_file(out / a["name"].get<std::string>()))) << a["name"];
    ++n;
  }
  EXPECT_GE(n, 5u);
  // Every numeric cell is finite.
  for (const char* f : {"solution.csv", "norms.csv", "decay.csv"}) {
    const auto rows = read_csv(out / f);
    for (std::size_t i = 1; i < rows.size(); ++i)
      for (const auto& cell : rows[i]) {
        char* end = nullptr;
        const double v = std::strtod(cell.c_str(), &end);
        if (end != cell.c_str() && *end == '\0') EXPECT_TRUE(std::isfinite(v)) << f;
      }
  }
}

TEST(Cli, HeatEigenDecayMatchesExponential) {
  const fs::path out = scratch("heat");
  ASSERT_EQ(run("solve", kConfigs / "heat_eigen.json", out).code, 0);
  const auto rows = read_csv(out / "decay.csv");
  ASSERT_GT(rows.size(), 100u);
  const std::size_t e = column(rows[0], "abs_error");
  double worst = 0.0;
  for (std::size_t i = 1; i < rows.size(); ++i) worst = std::max(worst, std::stod(rows[i][e]));
  EXPECT_LE(worst, 1e-5);
  // The reference is a genuine decay over the window, not a flat line.
  const std::size_t r = column(rows[0], "reference");
  EXPECT_LT(std::stod(rows.back()[r]), 0.01);
}

TEST(Cli, SinglePointSweepEqualsSolve) {
  json sc = rough_problem(0.7);
  sc["s_target"] = {0.7};
  sc["grids"] = {256};
  const fs::path sw = scratch("single_sweep");
  ASSERT_EQ(run("sweep", write_config("single_sweep", sc), sw).code, 0);
  json c = rough_problem(0.7);
  c["n"] = 256;
  const fs::path so = scratch("single_solve");
  ASSERT_EQ(run("solve", write_config("single_solve", c), so).code, 0);

  const auto srows = read_csv(sw / "sweep.csv");
  ASSERT_EQ(srows.size(), 2u);
  std::map<std::string, std::string> norms;
  for (const auto& row : read_csv(so / "norms.csv")) norms[row[0]] = row[1];
  EXPECT_EQ(srows[1][column(srows[0], "du_L2H")], norms.at("I.du.L2(H)"));
  EXPECT_EQ(srows[1][column(srows[0], "u_HhalfV")], norms.at("I.u.Hhalf(V)"));
  EXPECT_EQ(srows[1][column(srows[0], "mr")], norms.at("I.MR"));
}

TEST(Cli, SweepIndependentOfJobs) {
  json sc = rough_problem(0.7);
  sc["s_target"] = {0.45, 0.7};
  sc["grids"] = {256};
  const fs::path cfg = write_config("jobs", sc);
  mreg::RunConfig rc{"sweep", cfg, scratch("jobs1"), 1, 1, 0};
  std::ostringstream o, e;
  ASSERT_EQ(mreg::run_command(rc, o, e), 0);
  mreg::RunConfig rc3 = rc;
  rc3.out_dir = scratch("jobs3");
  rc3.jobs = 3;
  ASSERT_EQ(mreg::run_command(rc3, o, e), 0);
  for (const char* f : {"sweep.csv", "threshold.csv", "sweep.svg", "manifest.json"})
    EXPECT_EQ(mreg::read_file(rc.out_dir / f), mreg::read_file(rc3.out_dir / f)) << f;
}

TEST(Cli, ReportWritesBandsAndPlots) {
  const fs::path out = scratch("report");
  json c = rough_problem(0.7);
  c["grids"] = {256, 512};
  c["band_s"] = {0.3, 0.9};
  ASSERT_EQ(run("report", write_config("report", c), out).code, 0);
  const auto bands = read_csv(out / "bands.csv");
  ASSERT_GT(bands.size(), 4u);
  EXPECT_EQ(bands[0], (std::vector<std::string>{"s", "band", "lo", "hi", "contribution"}));
  EXPECT_EQ(read_csv(out / "norms.csv").size(), 3u);
  for (const char* f : {"norms.svg", "bands.svg"}) {
    const std::string svg = mreg::read_file(out / f);
    EXPECT_EQ(svg.rfind("<svg", 0), 0u);
    EXPECT_NE(svg.find("</svg>"), std::string::npos);
  }
  c["band_s"] = {1.5};
  EXPECT_EQ(run("report", write_config("report_bad", c), scratch("report_bad")).code, mreg::kExitConfigError);
}

TEST(Cli, BinaryExitCodes) {
  const std::string bin = MREG_CLI_PATH;
  auto sh = [&](const std::string& args) {
    const int s = std::system((bin + " " + args + " >/dev/null 2>&1").c_str());
    return WIFEXITED(s) ? WEXITSTATUS(s) : -1;
  };
  EXPECT_EQ(sh("solve --out " + scratch("bin_noconfig").string()), 3);
  EXPECT_EQ(sh("verify --config " + (kConfigs / "verify_tampered.json").string() + " --out " +
               scratch("bin_tampered").string()),
            2);
  EXPECT_EQ(sh("solve --config " + (kConfigs / "heat_eigen.json").string() + " --out " + scratch("bin_heat").string() +
               " --seed 2 --jobs 1"),
            0);
  EXPECT_EQ(sh("frobnicate"), 3);
}
