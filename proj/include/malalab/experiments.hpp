#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "malalab/config.hpp"

namespace malalab {

// One CLI invocation resolved: subcommand, parsed config, seed (CLI only;
// a 'seed' config key is rejected), output directory, worker count.
struct ExperimentConfig {
  std::string kind;
  Config config;
  std::uint64_t seed = 0;
  std::string out_dir = "out";
  int workers = 1;
};

inline constexpr int kExitOk = 0;
inline constexpr int kExitAssertFailed = 1;
inline constexpr int kExitConfigError = 2;
inline constexpr int kExitNumericError = 3;

// Runs the experiment, writing CSV artifacts under out_dir. Returns kExitOk
// or kExitAssertFailed; config and numeric problems propagate as
// config_error / numeric_error for the caller to map to exit codes.
int run_experiment(const ExperimentConfig& ec);

const std::vector<std::string>& experiment_kinds();

}
