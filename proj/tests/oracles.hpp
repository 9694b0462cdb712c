// Test-only reference computations, independent of the library's
// implementation paths: a brute-force collapsed-marginal oracle built from
// an n x n Gaussian integral plus log-grid quadrature over the variance,
// analytic truncated-normal moments, Kolmogorov-Smirnov machinery, and a
// regularized incomplete beta for Beta-distribution checks.
#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include "bsrmm/types.hpp"

namespace oracle {

inline double std_normal_cdf(double x) { return 0.5 * std::erfc(-x * M_SQRT1_2); }
inline double std_normal_sf(double x) { return 0.5 * std::erfc(x * M_SQRT1_2); }
inline double std_normal_pdf(double x) {
  return 0.39894228040143267794 * std::exp(-0.5 * x * x);
}

// log p(y | sigma2, gamma) with beta0 and beta_gamma integrated out
// analytically: y ~ N(0, sigma2 * M), M = I + 11^T + tau2 * X_g A^{-1} X_g^T.
struct GaussianPart {
  double logdet_M;
  double quad;  // y^T M^{-1} y
  int n;
};

inline GaussianPart gaussian_part(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                                  const std::vector<int>& active,
                                  const bsrmm::Hyperparameters& hp) {
  const int n = static_cast<int>(X.rows());
  const int pg = static_cast<int>(active.size());
  Eigen::MatrixXd M = Eigen::MatrixXd::Identity(n, n);
  M.array() += 1.0;  // 11^T
  if (pg > 0) {
    Eigen::MatrixXd Xg(n, pg);
    for (int j = 0; j < pg; ++j) Xg.col(j) = X.col(active[j]);
    Eigen::MatrixXd A = Eigen::MatrixXd::Identity(pg, pg);
    A.array() += hp.c * hp.c;
    M.noalias() += hp.tau2 * Xg * A.llt().solve(Xg.transpose());
  }
  Eigen::LLT<Eigen::MatrixXd> llt(M);
  if (llt.info() != Eigen::Success) throw std::runtime_error("oracle: M not PD");
  GaussianPart out;
  out.n = n;
  out.logdet_M = 2.0 * Eigen::MatrixXd(llt.matrixL()).diagonal().array().log().sum();
  out.quad = y.dot(llt.solve(y));
  return out;
}

// Full marginal log p(y | gamma) by quadrature of the inverse-gamma mixing
// density over a log-sigma2 grid (trapezoid on >= 2000 points around the
// integrand's peak).
inline double log_marginal_quadrature(const Eigen::MatrixXd& X, const Eigen::VectorXd& y,
                                      const std::vector<int>& active,
                                      const bsrmm::Hyperparameters& hp, int grid_points = 4001) {
  const GaussianPart g = gaussian_part(X, y, active, hp);
  const double half_nu = 0.5 * hp.nu;
  const double ig_const = half_nu * std::log(half_nu * hp.omega) - std::lgamma(half_nu);

  auto log_integrand = [&](double t) {
    // t = log sigma2; includes the Jacobian e^t.
    const double s2 = std::exp(t);
    const double log_like = -0.5 * g.n * std::log(2.0 * M_PI * s2) - 0.5 * g.logdet_M -
                            0.5 * g.quad / s2;
    const double log_prior = ig_const - (half_nu + 1.0) * t - half_nu * hp.omega / s2;
    return log_like + log_prior + t;
  };

  // Peak location: d/dt = 0 at s2 = (q/2 + nu*omega/2) / (n/2 + nu/2 ... ),
  // solved exactly for this integrand.
  const double s2_star =
      (0.5 * g.quad + half_nu * hp.omega) / (0.5 * g.n + half_nu);
  const double t_star = std::log(std::max(s2_star, 1e-300));
  const double lo = t_star - 40.0, hi = t_star + 40.0;
  const double h = (hi - lo) / (grid_points - 1);

  double max_lg = -std::numeric_limits<double>::infinity();
  std::vector<double> lg(grid_points);
  for (int k = 0; k < grid_points; ++k) {
    lg[k] = log_integrand(lo + k * h);
    max_lg = std::max(max_lg, lg[k]);
  }
  double sum = 0.0;
  for (int k = 0; k < grid_points; ++k) {
    const double w = (k == 0 || k == grid_points - 1) ? 0.5 : 1.0;
    sum += w * std::exp(lg[k] - max_lg);
  }
  return max_lg + std::log(sum * h);
}

// Truncated standard normal on (a, b): CDF and moments via survival
// functions, stable in deep tails.
inline double truncated_cdf(double x, double mean, double sd, double lower, double upper) {
  const double a = (lower - mean) / sd;
  const double b = (upper - mean) / sd;
  const double z = (x - mean) / sd;
  if (z <= a) return 0.0;
  if (z >= b) return 1.0;
  const double sf_a = std::isinf(a) ? 1.0 : std_normal_sf(a);
  const double sf_b = std::isinf(b) ? 0.0 : std_normal_sf(b);
  return (sf_a - std_normal_sf(z)) / (sf_a - sf_b);
}

inline double truncated_mean_lower(double a) {
  // E[Z | Z > a] for standard normal.
  return std_normal_pdf(a) / std_normal_sf(a);
}

// One-sample KS statistic against a CDF.
template <typename Cdf>
double ks_statistic(std::vector<double> draws, Cdf cdf) {
  std::sort(draws.begin(), draws.end());
  const double n = static_cast<double>(draws.size());
  double d = 0.0;
  for (size_t i = 0; i < draws.size(); ++i) {
    const double f = cdf(draws[i]);
    d = std::max(d, std::abs(f - static_cast<double>(i) / n));
    d = std::max(d, std::abs(f - static_cast<double>(i + 1) / n));
  }
  return d;
}

inline double ks_critical_1pct(size_t n) { return 1.6276 / std::sqrt(static_cast<double>(n)); }

// Regularized incomplete beta I_x(a,b) via Lentz's continued fraction.
inline double betacf(double a, double b, double x) {
  const double eps = 3e-16, fpmin = 1e-300;
  const double qab = a + b, qap = a + 1.0, qam = a - 1.0;
  double c = 1.0, d = 1.0 - qab * x / qap;
  if (std::abs(d) < fpmin) d = fpmin;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= 300; ++m) {
    const int m2 = 2 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < fpmin) d = fpmin;
    c = 1.0 + aa / c;
    if (std::abs(c) < fpmin) c = fpmin;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < fpmin) d = fpmin;
    c = 1.0 + aa / c;
    if (std::abs(c) < fpmin) c = fpmin;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < eps) break;
  }
  return h;
}

inline double beta_cdf(double x, double a, double b) {
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  const double ln_bt = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                       a * std::log(x) + b * std::log1p(-x);
  if (x < (a + 1.0) / (a + b + 2.0)) return std::exp(ln_bt) * betacf(a, b, x) / a;
  return 1.0 - std::exp(ln_bt) * betacf(b, a, 1.0 - x) / b;
}

inline double mean(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

inline double sample_sd(const std::vector<double>& v) {
  const double m = mean(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return std::sqrt(s / (static_cast<double>(v.size()) - 1.0));
}

// Standard error of the mean accounting for serial correlation via batch
// means (used by the joint-consistency check).
inline double batch_means_se(const std::vector<double>& v, int n_batches = 50) {
  const size_t bs = v.size() / static_cast<size_t>(n_batches);
  std::vector<double> bm;
  for (int b = 0; b < n_batches; ++b) {
    double s = 0.0;
    for (size_t i = 0; i < bs; ++i) s += v[b * bs + i];
    bm.push_back(s / static_cast<double>(bs));
  }
  return sample_sd(bm) / std::sqrt(static_cast<double>(n_batches));
}

}  // namespace oracle
