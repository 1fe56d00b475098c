#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"

namespace lc {

enum class Experiment {
  verify,
  spectrum,
  frobenius,
  newton_polygon,
  evolve_linear,
  evolve_nonlinear,
  nash_moser,
  appendix_check
};

std::string to_string(Experiment e);
Experiment parse_experiment(const std::string& name);  // throws ConfigError(usage)
const std::vector<std::string>& experiment_names();

struct ExperimentConfig {
  Experiment experiment = Experiment::verify;
  double kappa = 0.95;
  double sigma = 0.5;
  double T = 1.0;
  double eps = 1e-3;
  int cells = 200;
  double tau_max = 20.0;
  double dt = 0.0;  // 0 selects the CFL step
  std::uint64_t seed = 42;
  std::string out = "out";
  long n_max = 2000;
  int trials = 100;
  double mu1 = 0.1, mu2 = 1.5;
  double horizon = 10.0;
  int m_max = 12;
  std::string linearization = "consistent";

  /// Throws ConfigError(range) citing the violated precondition.
  void validate() const;
  nlohmann::json to_json() const;
  bool operator==(const ExperimentConfig&) const = default;
};

/// Parses {"experiment": ..., "params": {...}}. Parse errors carry the byte
/// position; unknown keys are rejected by name.
ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::string& path);

struct Check {
  std::string name;
  double value = 0.0;
  double threshold = 0.0;
  bool pass = false;
};

struct OutputFile {
  std::string path;
  std::string sha256;
};

struct RunManifest {
  nlohmann::json config;
  std::string version;
  double wall_seconds = 0.0;
  std::vector<OutputFile> outputs;
  std::vector<Check> checks;

  bool all_pass() const;
  nlohmann::json to_json() const;
  static RunManifest from_json(const nlohmann::json& j);
};

/// Runs the experiment, writes its outputs and manifest.json into cfg.out.
RunManifest run_experiment(const ExperimentConfig& cfg);

struct SummaryResult {
  std::string text;
  bool all_pass = true;
};

SummaryResult summary(const std::vector<RunManifest>& manifests);

/// Entry point of the command-line tool; returns the process exit code.
int cli_main(int argc, char** argv);

}  // namespace lc
