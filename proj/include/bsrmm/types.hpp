#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

namespace bsrmm {

// Design matrix plus partially observed outcome on the log scale.
// X columns are expected centered/scaled unless standardization was
// explicitly disabled; observed outcome entries live in y_obs where R = 1.
struct Dataset {
  Eigen::MatrixXd X;       // n x p
  Eigen::VectorXd y_obs;   // length n; only entries with R = 1 are meaningful
  Eigen::VectorXi R;       // length n; 1 = observed
  double xi = 0.0;         // limit of detection, log scale (before lod_scale)
  int n = 0;
  int p = 0;

  std::vector<std::string> sample_ids;   // optional, size n when present
  std::vector<std::string> feature_ids;  // optional, size p when present
};

// Throws input_error when the invariants fail. `standardized` toggles the
// column mean/sd checks.
void validate_dataset(const Dataset& ds, bool standardized = true);

struct Hyperparameters {
  double nu = 2.0;
  double omega = 1.0;
  double tau2 = 100.0;
  double c = 100.0;
  double lod_scale = 1.0;
  Eigen::VectorXd ising_a;     // length p; empty means "broadcast ising_a_scalar"
  double ising_a_scalar = -12.0;
  Eigen::MatrixXd ising_Q;     // p x p symmetric; empty means Q = 0
  // Pair-counting convention for the conditional prior odds: when true
  // (default) a flip of gamma_r changes the quadratic form by
  // 2 * sum_j q_rj gamma_j, the conditional implied by the symmetric joint
  // exponent gamma^T Q gamma. false counts each pair once.
  bool ising_double_count = true;

  // Fill ising_a from the scalar when empty; validates shapes against p.
  void bind(int p);
};

void validate_hyperparameters(const Hyperparameters& hp, int p);

// Inclusion indicators plus the sorted active index list.
struct SelectionState {
  Eigen::VectorXi gamma;    // length p, 0/1
  std::vector<int> active;  // sorted ascending
  int p_gamma = 0;

  static SelectionState empty(int p);
  static SelectionState from_active(int p, std::vector<int> active_idx);
};

struct RegressionState {
  double beta0 = 0.0;
  Eigen::VectorXd beta_active;  // coefficients for the active features
  double sigma2 = 1.0;
};

struct MissingnessState {
  Eigen::VectorXd y_latent;  // length n; equals y_obs where observed
  Eigen::VectorXi Z;         // length n; meaningful only where R = 0 (1 = MNAR)
  double theta = 0.5;
};

// Cached quantities of the collapsed model for one selection state:
// a_gamma, its Cholesky factor, beta_hat, the residual quadratic form
// C_gamma, and the collapsed log marginal likelihood log p(y | gamma).
struct CollapsedQuantities {
  Eigen::MatrixXd a_gamma;
  Eigen::MatrixXd a_gamma_chol;  // lower triangular
  Eigen::VectorXd beta_hat;
  double c_gamma = 0.0;
  double log_marginal = 0.0;
};

}  // namespace bsrmm
