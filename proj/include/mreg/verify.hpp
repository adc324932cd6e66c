#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace mreg {

// Every check reduces to measured <= tolerance.
struct CheckResult {
  std::string id;
  std::string anchor;  // what the check is about, in words
  double measured = 0.0;
  double tolerance = 0.0;
  bool pass = false;
  std::size_t samples = 0;
  nlohmann::json detail = nlohmann::json::object();
  double slack() const { return tolerance - measured; }
};

struct VerifyOptions {
  std::uint64_t seed = 1;
  // Multiplies every sample count (at least one sample survives).
  double sample_scale = 1.0;
  std::vector<std::string> only;                  // empty: all checks
  std::map<std::string, double> tolerances;      // per-check override
  std::optional<double> tolerance_all;           // overrides every tolerance
};

struct CheckInfo {
  std::string id, anchor;
  double tolerance;
};
const std::vector<CheckInfo>& verify_checks();

// Throws ConfigError on unknown ids.
CheckResult run_check(const std::string& id, const VerifyOptions& opt);
std::vector<CheckResult> run_verify(const VerifyOptions& opt);

// id,anchor,measured,tolerance,slack,pass,samples with fixed %.9e formatting.
std::string verify_csv(const std::vector<CheckResult>& results);

// {"sample_scale", "checks": [...], "tolerances": {id: value}, "tolerance_override": value}
VerifyOptions verify_options_from_json(const nlohmann::json& j, std::uint64_t seed);

}  // namespace mreg
