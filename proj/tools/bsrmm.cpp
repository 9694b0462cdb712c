// Command-line front end: simulate benchmark data, fit the model, run
// replicate benchmarks, and re-render aggregates.

#include <CLI11.hpp>

#include <exception>
#include <iostream>
#include <string>

#include "bsrmm/errors.hpp"
#include "bsrmm/runner.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInput = 2;
constexpr int kExitNumerical = 3;
constexpr int kExitInternal = 4;

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"BSRMM: Bayesian sparse regression for compositional predictors "
               "with a partially observed outcome"};
  app.require_subcommand(1);
  int threads = bsrmm::default_thread_count();
  app.add_option("--threads", threads, "worker threads for benchmark replicates");

  auto* sim = app.add_subcommand("simulate", "generate one synthetic dataset");
  std::string sim_scenario, sim_out;
  sim->add_option("--scenario", sim_scenario, "scenario file")->required();
  sim->add_option("--out", sim_out, "output directory")->required();

  auto* fit = app.add_subcommand("fit", "fit the model to one dataset");
  bsrmm::FitPaths fit_paths;
  fit->add_option("--x", fit_paths.x_path, "design matrix CSV")->required();
  fit->add_option("--y", fit_paths.y_path, "outcome CSV")->required();
  fit->add_option("--q", fit_paths.q_path, "optional Q matrix CSV");
  fit->add_option("--config", fit_paths.config_path, "run configuration file")->required();
  fit->add_option("--out", fit_paths.out_dir, "output directory")->required();

  auto* bench = app.add_subcommand("benchmark", "run replicated benchmark scenarios");
  std::string bench_scenario, bench_out;
  int replicates = 10;
  bench->add_option("--scenario", bench_scenario, "scenario file")->required();
  bench->add_option("--replicates", replicates, "number of replicates")->required();
  bench->add_option("--out", bench_out, "output directory")->required();

  auto* summ = app.add_subcommand("summarize", "re-render aggregates from stored metrics");
  std::string summ_dir;
  summ->add_option("--in", summ_dir, "directory holding metrics.csv")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "Error: " << e.what() << "\n";
    return kExitInput;
  }

  try {
    if (sim->parsed()) {
      bsrmm::run_simulate(sim_scenario, sim_out);
    } else if (fit->parsed()) {
      bsrmm::run_fit(fit_paths);
    } else if (bench->parsed()) {
      bsrmm::run_benchmark(bench_scenario, replicates, bench_out, threads);
    } else if (summ->parsed()) {
      bsrmm::run_summarize(summ_dir);
    }
  } catch (const bsrmm::input_error& e) {
    std::cerr << "Error: " << e.what() << "\n";
    return kExitInput;
  } catch (const bsrmm::numerical_error& e) {
    std::cerr << "Error: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const std::exception& e) {
    std::cerr << "Internal error: " << e.what() << "\n";
    return kExitInternal;
  }
  return kExitOk;
}
