// Command-line driver: config-driven, reproducible experiment runs.
// Exit codes: 0 all-pass, 1 check failed, 2 precondition/schema,
// 3 blowup-suspected, 4 I/O.

#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "sdrd/config.hpp"
#include "sdrd/runner.hpp"
#include "sdrd/version.hpp"

int main(int argc, char** argv) {
  CLI::App app{"spectral simulator and estimate auditor for delayed reaction-diffusion systems"};
  app.set_version_flag("--version", std::string(sdrd::kVersion));

  std::string config_path;
  sdrd::CliOptions opts;

  CLI::App* run = app.add_subcommand("run", "run one experiment from a config file");
  run->add_option("config", config_path, "experiment config (JSON)")->required();
  run->add_option("--out", opts.out_dir, "output directory (overrides the config)");
  run->add_option("--jobs", opts.jobs, "parallel trajectory runs")->check(CLI::PositiveNumber);
  run->add_flag("--dump-modes", opts.dump_modes, "append one modal column per mode to CSVs");
  app.require_subcommand(1);

  CLI11_PARSE(app, argc, argv);

  try {
    const sdrd::ExperimentConfig cfg = sdrd::load_config(config_path);
    return sdrd::run_experiment(cfg, opts);
  } catch (const sdrd::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    for (const auto& v : e.violations()) std::cerr << "  - " << v << "\n";
    return sdrd::kExitPrecondition;
  }
}
