#include <iostream>

#include <CLI11.hpp>

#include "mreg/commands.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Maximal-regularity toolkit: property suites, solves, sweeps and reports"};
  app.require_subcommand(1, 1);
  mreg::RunConfig rc;
  std::string config, out;
  for (const char* name : {"verify", "solve", "sweep", "report"}) {
    auto* sub = app.add_subcommand(name);
    sub->add_option("--config", config, "JSON config")->check(CLI::ExistingFile);
    sub->add_option("--out", out, "output directory")->required();
    sub->add_option("--seed", rc.seed, "seed for randomized suites")->default_val(1);
    sub->add_option("--jobs", rc.jobs, "worker threads (0: all cores)")->default_val(1);
    sub->add_option("-v,--verbosity", rc.verbosity, "0 quiet, 1 progress")->default_val(1);
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : mreg::kExitConfigError;
  }
  rc.command = app.get_subcommands().front()->get_name();
  rc.config_path = config;
  rc.out_dir = out;
  return mreg::run_command(rc, std::cout, std::cerr);
}
