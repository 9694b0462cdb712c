#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <utility>
#include <vector>

#include "bsrmm/rng.hpp"
#include "bsrmm/types.hpp"

namespace bsrmm {

enum class Design { independent, dependent };

Design parse_design(const std::string& s);
std::string design_name(Design d);

struct ScenarioSpec {
  int n = 300;
  int p = 1000;
  Design design = Design::independent;
  double snr = 10.0;
  double missing_rate = 0.4;
  double mnar_fraction = 2.0 / 3.0;
  std::uint64_t seed = 1;
  double train_fraction = 0.7;

  double beta0_true = 0.0;
  bool heavy_tail_errors = false;   // Student-t(3) errors scaled by sigma
  bool exp2_numerator = false;      // literal e^{2o}/sum e^{o} compositional map
  bool stochastic_mnar = false;     // censoring probability decays above the LOD
  double mnar_decay_scale = 1.0;    // decay length in units of sd(y)
  double lod_jitter_sd = 0.0;       // per-sample detection-limit jitter, log scale
};

void validate_scenario(const ScenarioSpec& spec);

struct SimulatedTruth {
  Eigen::VectorXd beta_true;
  double beta0_true = 0.0;
  double sigma_true = 0.0;
  Eigen::VectorXd y_true;        // complete outcome, log scale
  Eigen::VectorXi R;             // 1 = observed after injection
  Eigen::VectorXi missing_mask;  // 1 = missing
  Eigen::VectorXi mnar_mask;     // 1 = missing below the detection limit
  double xi = 0.0;               // minimum retained observed value
  std::vector<int> train_idx, test_idx;
  std::vector<int> support;      // indices of nonzero beta
};

struct CovariateDraw {
  Eigen::MatrixXd O;  // latent normal basis
  Eigen::MatrixXd U;  // compositions (rows sum to 1)
  Eigen::MatrixXd X;  // log compositions, not yet standardized
  bool jitter_applied = false;
};

CovariateDraw generate_covariates(const ScenarioSpec& spec, Rng& rng);

// Exact coefficient vectors of the benchmark designs; returns (beta, support).
std::pair<Eigen::VectorXd, std::vector<int>> assign_coefficients(const ScenarioSpec& spec);

// sigma = mean|nonzero beta| / snr; y = beta0 + X beta + noise.
std::pair<Eigen::VectorXd, double> generate_outcome(const Eigen::MatrixXd& X_raw_logs,
                                                    const Eigen::VectorXd& beta_true,
                                                    const ScenarioSpec& spec, Rng& rng);

struct MissingnessDraw {
  Eigen::VectorXd y_obs;  // NaN where missing
  Eigen::VectorXi R;
  Eigen::VectorXi missing_mask;
  Eigen::VectorXi mnar_mask;
  double xi = 0.0;
};

MissingnessDraw inject_missingness(const Eigen::VectorXd& y_true, const ScenarioSpec& spec,
                                   Rng& rng);

// 70/30-style split stratified on the observation indicator.
std::pair<std::vector<int>, std::vector<int>> split_train_test(const Eigen::VectorXi& R,
                                                               double train_fraction, Rng& rng);

// The benchmark Q matrix: pairwise 2.001 inside each similarity block,
// 0.001 elsewhere off the diagonal, zero diagonal. Requires p >= 960.
Eigen::MatrixXd build_sim_Q(int p);

struct Standardization {
  Eigen::VectorXd mean, sd;
};

// Center and scale columns in place (sample sd, n-1 denominator).
Standardization standardize_columns(Eigen::MatrixXd& X);
void apply_standardization(Eigen::MatrixXd& X, const Standardization& s);

// One fully prepared benchmark replicate: training dataset (standardized on
// the training rows), held-out test pieces, ground truth, and the scenario Q.
struct ReplicateData {
  SimulatedTruth truth;
  Dataset train;
  Eigen::MatrixXd X_test;  // standardized with the training factors
  Eigen::VectorXd y_test;  // true log outcomes for test rows
  Eigen::VectorXi R_test;
  Eigen::MatrixXd Q;       // empty for the independent design
  Eigen::MatrixXd X_raw;   // raw log compositions for the full n (for export)
};

ReplicateData make_replicate(const ScenarioSpec& spec);

}  // namespace bsrmm
