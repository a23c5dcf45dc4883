// homogenize: runs experiment configs and writes CSV tables + a manifest.
//
// Exit codes: 0 success, 1 config/validation error, 2 solver error.
// HOMOGENIZE_OUT, when set, overrides --out.

#include <cstdlib>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "homog/experiments.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Effective-conductivity toolkit for periodically heterogeneous "
               "materials and curved-surface heat conduction"};
  app.require_subcommand(1);

  std::string config;
  std::string out_dir = "out";
  int threads = 1;
  std::uint64_t seed = 0;

  CLI::App* run = app.add_subcommand("run", "Run an experiment config");
  run->add_option("config", config, "Experiment config file (INI-style)")
      ->required();
  run->add_option("--out", out_dir, "Output directory (default: out)");
  run->add_option("--threads", threads,
                  "Max concurrent independent solves (default: 1)");
  run->add_option("--seed", seed,
                  "Seed for randomized validation sampling (default: 0)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 1;
  }

  if (const char* env_out = std::getenv("HOMOGENIZE_OUT"); env_out && *env_out)
    out_dir = env_out;
  if (threads < 1) {
    std::cerr << "error: --threads must be >= 1\n";
    return 1;
  }

  homog::RunOptions options;
  options.out_dir = out_dir;
  options.threads = threads;
  options.seed = seed;

  const homog::RunResult result = homog::run_experiment(config, options);
  if (result.exit_code == 0) {
    std::cout << "ok: " << result.outputs.size() << " output file(s) in "
              << out_dir << "\n";
  } else {
    std::cerr << "error: " << result.error << "\n";
  }
  return result.exit_code;
}
