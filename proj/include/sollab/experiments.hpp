#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

namespace sollab {

struct Check {
  std::string name;
  bool passed = false;
  double value = 0.0;
  double limit = 0.0;
};

struct ArtifactFile {
  std::string name;  // relative to the output directory
  std::uintmax_t bytes = 0;
  std::string sha256;
};

struct ExperimentResult {
  std::string experiment;
  std::vector<Check> checks;
  std::vector<ArtifactFile> files;

  bool passed() const;
  nlohmann::json manifest() const;
};

struct RunOptions {
  std::filesystem::path out_dir = ".";
  std::filesystem::path config_dir = ".";   // base for relative file references inside the config
  std::optional<std::uint64_t> seed_rng;    // enables the fit-window jitter check
};

const std::vector<std::string>& experiment_names();

// Runs one experiment and writes its artifacts plus manifest.json into opts.out_dir.
// Bad configs raise Error(config_invalid) with the offending field in the message.
ExperimentResult run_experiment(const std::string& name, const nlohmann::json& config, const RunOptions& opts);

nlohmann::json load_config(const std::filesystem::path& path);

std::string sha256_hex(const std::string& bytes);

// Writes through a temporary file in the same directory, then renames.
void write_atomic(const std::filesystem::path& path, const std::string& bytes);

}  // namespace sollab
