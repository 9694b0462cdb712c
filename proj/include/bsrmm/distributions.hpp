#pragma once

#include <Eigen/Dense>
#include <limits>

#include "bsrmm/rng.hpp"

namespace bsrmm {

// Normal(mean, sd^2) restricted to the open interval (lower, upper).
// Either bound may be infinite.
struct TruncatedNormalSpec {
  double mean = 0.0;
  double sd = 1.0;
  double lower = -std::numeric_limits<double>::infinity();
  double upper = std::numeric_limits<double>::infinity();
};

// Standard normal CDF and upper tail probability. The upper-tail form stays
// accurate far into the tail where 1 - Phi(x) would cancel.
double normal_cdf(double x);
double normal_cdf_upper(double x);
double normal_pdf(double x);

// Draw from a truncated normal. Bulk regions use plain rejection from the
// normal; tail regions use one-sided exponential rejection so draws stay
// exact even when the interval starts 8+ sd from the mean.
double sample_truncated_normal(const TruncatedNormalSpec& spec, Rng& rng);

// Reciprocal of a Gamma(shape, rate) draw; mean rate/(shape-1) for shape > 1.
double sample_inverse_gamma(double shape, double rate, Rng& rng);

// Draw from N(mean, sigma2 * A^{-1}) given the lower Cholesky factor L of A,
// by back-substitution on L^T. The explicit inverse is never formed.
Eigen::VectorXd sample_mvn_from_precision_factor(const Eigen::VectorXd& mean,
                                                 const Eigen::MatrixXd& chol_lower,
                                                 double sigma2, Rng& rng);

}  // namespace bsrmm
