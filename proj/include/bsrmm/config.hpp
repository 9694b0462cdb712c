#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "bsrmm/sampler.hpp"
#include "bsrmm/simulation.hpp"
#include "bsrmm/types.hpp"

namespace bsrmm {

struct PreprocessConfig {
  double prevalence_min = 0.30;
  double mean_abundance_min = 0.003;
  double pseudocount_factor = 0.5;
  bool standardize = true;
};

void validate_preprocess_config(const PreprocessConfig& cfg);

// Everything a `fit` run needs beyond the data files. Parsed from a flat
// key = value file; unknown or duplicate keys are errors.
struct RunConfig {
  Hyperparameters hp;
  SamplerConfig sampler;
  PreprocessConfig preprocess;
  bool apply_preprocess = false;  // treat --x as a raw abundance table
};

RunConfig parse_run_config(const std::string& path);

// Scenario file for simulate/benchmark. Accepts the scenario keys plus any
// run-config key so a benchmark is fully described by one file.
struct BenchmarkScenario {
  ScenarioSpec spec;
  RunConfig run;
  std::vector<ImputeMode> impute_modes = {ImputeMode::model, ImputeMode::mean,
                                          ImputeMode::half_min};
};

BenchmarkScenario parse_scenario(const std::string& path);

// Shared low-level parser: key = value lines, '#' comments.
std::map<std::string, std::string> read_key_value_file(const std::string& path);

}  // namespace bsrmm
