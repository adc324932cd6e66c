#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>

namespace mreg {

enum ExitCode : int { kExitOk = 0, kExitCheckFailure = 2, kExitConfigError = 3, kExitNumericalFailure = 4 };

struct RunConfig {
  std::string command;                  // verify | solve | sweep | report
  std::filesystem::path config_path;    // may be empty for verify
  std::filesystem::path out_dir;
  std::uint64_t seed = 1;
  unsigned jobs = 1;                    // 0: hardware concurrency
  int verbosity = 1;
};

// Runs one command and maps failures onto exit codes. Progress goes to out, problems to err.
int run_command(const RunConfig& cfg, std::ostream& out, std::ostream& err);

}  // namespace mreg
