#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "bsrmm/config.hpp"
#include "bsrmm/metrics.hpp"
#include "bsrmm/sampler.hpp"
#include "bsrmm/simulation.hpp"

namespace bsrmm {

// File-level orchestration used by both the CLI and the test suites.

void run_simulate(const std::string& scenario_path, const std::string& out_dir);

struct FitPaths {
  std::string x_path;
  std::string y_path;
  std::string q_path;  // empty means no Q: independent Bernoulli-equivalent prior
  std::string config_path;
  std::string out_dir;
};

void run_fit(const FitPaths& paths);

void run_benchmark(const std::string& scenario_path, int replicates, const std::string& out_dir,
                   int threads);

void run_summarize(const std::string& dir);

// In-memory benchmark pieces (exposed for the acceptance suite).
ChainSummary fit_replicate(const ReplicateData& rep, const RunConfig& run, ImputeMode mode,
                           std::uint64_t chain_seed);

EvaluationReport evaluate_replicate(const ReplicateData& rep, const ChainSummary& summary);

struct BenchmarkRow {
  int replicate = 0;
  std::string mode;
  EvaluationReport report;
};

std::vector<BenchmarkRow> benchmark_scenario(const BenchmarkScenario& sc, int replicates,
                                             int threads);

// Seed of the data-generation stream for one replicate, and of the chains
// fit to it. Replicate index 0 reproduces the scenario's own seed layout.
std::uint64_t replicate_data_seed(std::uint64_t master, int replicate);
std::uint64_t replicate_chain_seed(std::uint64_t master, int replicate);

int default_thread_count();

}  // namespace bsrmm
