#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include "distkp/sim.hpp"

namespace distkp {

/// Malformed flag, config key, or value. Exit code 1.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Config file missing or unreadable. Exit code 2.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// --help was given; what() holds the help text. Exit code 0.
class HelpRequested : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum ExitCode : int { kExitOk = 0, kExitUsage = 1, kExitRuntime = 2, kExitConnectivity = 3 };

struct ExperimentSpec {
  SimConfig config;
  bool run_distkp = true;
  bool run_oracle = false;
  bool run_baseline = false;
  double lambda = 0.99;
  std::filesystem::path output_dir = "distkp_out";
  /// Empty means the single seed in `config.seed`.
  std::vector<std::uint64_t> seeds;

  std::vector<std::uint64_t> resolved_seeds() const;
};

void validate(const ExperimentSpec& spec);

/// Apply `key = value` lines ('#' starts a comment) on top of `spec`. Unknown keys are rejected.
void apply_config(std::istream& in, ExperimentSpec& spec);

/// Apply one key/value pair (config-file spelling).
void apply_setting(ExperimentSpec& spec, const std::string& key, const std::string& value);

/// Defaults, then --config file, then flags. Throws UsageError, IoError or HelpRequested.
ExperimentSpec parse_args_and_config(int argc, const char* const* argv);

/// Runs every selected method for every seed and writes the CSV artifacts. Returns an ExitCode.
int run_experiment(const ExperimentSpec& spec, std::ostream& log);

}  // namespace distkp
