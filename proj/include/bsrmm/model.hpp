#pragma once

#include <Eigen/Dense>
#include <vector>

#include "bsrmm/types.hpp"

namespace bsrmm {

// Inverse of I + c^2 * 11^T via Sherman-Morrison:
// (I + c^2 11^T)^{-1} = I - (c^2 / (1 + c^2 p)) 11^T.
Eigen::MatrixXd gram_inverse_zprior(int p_gamma, double c);

// Centered Gram quantities shared by every collapsed evaluation against one
// response vector: G = X^T K X with K = I - 11^T/(n+1), v = X^T K y, and
// yKy = y^T K y. G depends only on X and is built once; refresh_response
// updates v and yKy when the (latent) response changes.
struct ResponseCache {
  const Eigen::MatrixXd* X = nullptr;
  int n = 0;
  Eigen::MatrixXd G;        // p x p
  Eigen::VectorXd col_sum;  // length p
  Eigen::VectorXd v;        // length p
  double y_sum = 0.0;
  double yKy = 0.0;

  void init(const Eigen::MatrixXd& X_in);
  void refresh_response(const Eigen::VectorXd& y);
};

// Collapsed model quantities for the active set, computed from the cached
// Gram pieces. Fresh Cholesky every call; no rank-one updating.
CollapsedQuantities compute_collapsed_cached(const ResponseCache& cache,
                                             const std::vector<int>& active,
                                             const Hyperparameters& hp);

// Convenience form matching the operation contract: builds the Gram pieces
// for (dataset.X, y) on the fly.
CollapsedQuantities compute_collapsed(const Dataset& dataset, const Eigen::VectorXd& y,
                                      const SelectionState& selection,
                                      const Hyperparameters& hp);

// log BF of flipping feature r: log p(y | gamma with gamma_r flipped) - log p(y | gamma).
double bayes_factor_flip(const Dataset& dataset, const Eigen::VectorXd& y,
                         const SelectionState& selection, const Hyperparameters& hp, int r);

// Log prior odds of gamma_r = 1 vs 0 given the rest, under the Ising prior.
// The pairwise sum runs over selected j != r; hp.ising_double_count controls
// whether symmetric pairs are counted twice.
double ising_conditional_log_odds(const SelectionState& selection, const Hyperparameters& hp,
                                  int r);

// P(Z_i = 1 | missing), the probability that a missing outcome sits below the
// limit of detection. Stable in both tails.
double mnar_posterior_probability(double mu_i, double sigma, double xi, double theta);

// Posterior inclusion probability for one flip: combines the Ising prior
// odds with the collapsed Bayes factor toward inclusion.
double inclusion_probability(double prior_log_odds, double log_bf_inclusion);

// Helper shared by active-set bookkeeping: active with r inserted (sorted)
// or removed.
std::vector<int> active_with(const std::vector<int>& active, int r);
std::vector<int> active_without(const std::vector<int>& active, int r);

}  // namespace bsrmm
