#include <cstdio>
#include <filesystem>
#include <iostream>

#include <CLI11.hpp>

#include "sollab/error.hpp"
#include "sollab/experiments.hpp"

// Exit status: 0 all checks passed, 1 a check failed, 2 bad usage or config, 3 numerical module error.
int main(int argc, char** argv) {
  CLI::App app{"Soliton-potential interaction experiments"};
  std::string experiment;
  std::string config;
  std::string out = ".";
  std::uint64_t seed = 0;
  app.add_option("experiment", experiment, "Experiment to run")
      ->required()
      ->check(CLI::IsMember(sollab::experiment_names()));
  app.add_option("--config", config, "JSON config file")->required();
  app.add_option("--out", out, "Output directory");
  auto* seed_opt = app.add_option("--seed-rng", seed, "Seed for the fit-window jitter check");
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    sollab::RunOptions opts;
    opts.out_dir = out;
    opts.config_dir = std::filesystem::path(config).parent_path();
    if (*seed_opt) opts.seed_rng = seed;
    const auto cfg = sollab::load_config(config);
    const auto res = sollab::run_experiment(experiment, cfg, opts);
    for (const auto& c : res.checks)
      std::printf("%s %s value=%.6g limit=%.6g\n", c.passed ? "PASS" : "FAIL", c.name.c_str(), c.value, c.limit);
    std::printf("%s: %s\n", experiment.c_str(), res.passed() ? "pass" : "fail");
    return res.passed() ? 0 : 1;
  } catch (const sollab::Error& e) {
    std::cerr << experiment << ": " << e.what() << "\n";
    return e.code() == sollab::ErrorCode::config_invalid ? 2 : 3;
  } catch (const std::exception& e) {
    std::cerr << experiment << ": " << e.what() << "\n";
    return 3;
  }
}
