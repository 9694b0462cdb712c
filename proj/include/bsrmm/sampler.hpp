#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "bsrmm/model.hpp"
#include "bsrmm/rng.hpp"
#include "bsrmm/types.hpp"

namespace bsrmm {

enum class ImputeMode { model, mean, half_min };

ImputeMode parse_impute_mode(const std::string& s);
std::string impute_mode_name(ImputeMode m);

struct SamplerConfig {
  int n_iterations = 10000;      // sweeps
  int burn_in = 5000;
  int gamma_updates_per_sweep = 0;  // 0 means "p single-index updates per sweep"
  std::uint64_t seed = 12345;
  int thin = 1;
  ImputeMode impute_mode = ImputeMode::model;
  bool store_traces = false;
};

void validate_sampler_config(const SamplerConfig& cfg);

struct ChainSummary {
  Eigen::VectorXd ppi;                                       // length p
  std::vector<int> selected;                                 // indices with ppi > 0.5
  Eigen::VectorXd beta_mean, beta_ci_lower, beta_ci_upper;   // length p, conditional on inclusion
  double beta0_mean = 0.0;
  double sigma2_mean = 0.0;
  double theta_mean = 0.5;
  std::vector<int> missing_indices;
  Eigen::VectorXd y_imputed_mean, y_imputed_ci_lower, y_imputed_ci_upper;  // over missing
  long gamma_updates = 0;
  long gamma_flips = 0;
  int n_draws = 0;
  // max over stored draws of |sum of active beta| / (sqrt(p_g/(1+c^2 p_g)) * sigma * tau)
  double zero_sum_envelope_max = 0.0;

  // Per-sweep traces, filled only when store_traces is set.
  std::vector<int> trace_p_gamma;
  std::vector<double> trace_beta0, trace_sigma2, trace_theta, trace_log_post;
  std::vector<std::vector<std::pair<int, double>>> trace_beta;  // (feature, value) of active set

  // Model-averaged coefficients: ppi .* conditional mean. Used for prediction.
  Eigen::VectorXd beta_model_averaged() const;
};

// One Gibbs chain over (gamma, beta0, beta, sigma2, Z, y_missing, theta).
// The chain is strictly sequential; instances are not shareable across
// threads. Exposed as a class so tests can drive individual update steps
// and the joint-consistency check can alternate data and parameter draws.
class GibbsEngine {
 public:
  GibbsEngine(const Dataset& dataset, const Hyperparameters& hp, const SamplerConfig& cfg);
  GibbsEngine(const GibbsEngine&) = delete;
  GibbsEngine& operator=(const GibbsEngine&) = delete;

  // Single-index gamma updates (count draws of a uniformly random index).
  void update_gamma(int count);
  // sigma2, beta (active), beta0 from their collapsed conditionals.
  void update_regression();
  // Z and latent y for every missing sample.
  void update_missingness();
  void update_theta();
  // One full sweep in the fixed order gamma -> regression -> Z -> y -> theta.
  void sweep();

  // Replace the response data in place (used by the joint-consistency test):
  // y_full supplies both observed values and the current latent values.
  void set_response(const Eigen::VectorXd& y_full, const Eigen::VectorXi& R);
  void set_selection(const std::vector<int>& active);
  void set_regression(double beta0, const Eigen::VectorXd& beta_active, double sigma2);
  void set_theta(double theta);

  const SelectionState& selection() const { return sel_; }
  const RegressionState& regression() const { return reg_; }
  const MissingnessState& missingness() const { return mis_; }
  const CollapsedQuantities& collapsed() const { return col_; }
  const std::vector<int>& missing_indices() const { return missing_; }
  double xi_effective() const { return xi_eff_; }
  long gamma_flips() const { return gamma_flips_; }
  long gamma_updates() const { return gamma_updates_; }
  Rng& rng() { return rng_; }

  // Probability used for the gamma_r Bernoulli draw given the current state.
  double gamma_inclusion_probability(int r) const;
  // Joint log density of the current state: collapsed marginal plus the
  // Ising prior exponent (normalizing constant omitted).
  double log_posterior() const;

  bool missingness_active() const { return missingness_active_; }

 private:
  void refresh_after_response_change();

  Dataset ds_;  // owned copy; set_response mutates it
  Hyperparameters hp_;
  SamplerConfig cfg_;
  Rng rng_;
  double xi_eff_ = 0.0;
  bool missingness_active_ = true;

  ResponseCache cache_;
  SelectionState sel_;
  RegressionState reg_;
  MissingnessState mis_;
  CollapsedQuantities col_;
  std::vector<int> missing_;
  long gamma_flips_ = 0;
  long gamma_updates_ = 0;
};

// Run a full chain and summarize. The dataset must already be standardized
// (or carry standardize=false semantics upstream).
ChainSummary run_chain(const Dataset& dataset, const Hyperparameters& hp,
                       const SamplerConfig& cfg);

// Equal-tailed quantile of a draw vector (linear interpolation on sorted values).
double draw_quantile(std::vector<double> draws, double q);

}  // namespace bsrmm
