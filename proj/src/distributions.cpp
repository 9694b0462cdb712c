#include "bsrmm/distributions.hpp"

#include <cmath>
#include <sstream>

#include "bsrmm/errors.hpp"

namespace bsrmm {

namespace {

constexpr double kSqrt1_2 = 0.70710678118654752440;
constexpr double kInvSqrt2Pi = 0.39894228040143267794;

// Standardized truncation point beyond which exponential rejection beats
// plain rejection from the normal.
constexpr double kTailSwitch = 0.45;

// Robert (1995) one-sided tail sampler: standard normal conditioned on
// z >= a with a > 0.
double sample_tail_above(double a, Rng& rng) {
  const double lambda = 0.5 * (a + std::sqrt(a * a + 4.0));
  for (;;) {
    const double z = a + rng.exponential() / lambda;
    const double d = z - lambda;
    if (rng.uniform() <= std::exp(-0.5 * d * d)) return z;
  }
}

// Standard normal conditioned on z > a (one-sided, a finite).
double sample_std_above(double a, Rng& rng) {
  if (a <= kTailSwitch) {
    for (;;) {
      const double z = rng.normal();
      if (z > a) return z;
    }
  }
  for (;;) {
    const double z = sample_tail_above(a, rng);
    if (z > a) return z;  // excludes the z == a boundary case
  }
}

// Standard normal conditioned on a < z < b, both finite.
double sample_std_interval(double a, double b, Rng& rng) {
  // Mirror so that the interval sits in the upper half line or straddles 0.
  if (b < 0.0) return -sample_std_interval(-b, -a, rng);

  if (a <= 0.0) {
    if (b - a >= 1.3) {
      for (;;) {
        const double z = rng.normal();
        if (z > a && z < b) return z;
      }
    }
    // Narrow interval around the mode: uniform proposal, bound M = phi(0).
    for (;;) {
      const double z = a + (b - a) * rng.uniform();
      if (z > a && z < b && rng.uniform() <= std::exp(-0.5 * z * z)) return z;
    }
  }

  // Interval strictly in the upper tail.
  if (a <= kTailSwitch || a * (b - a) > 1.3) {
    for (;;) {
      const double z = sample_std_above(a, rng);
      if (z < b) return z;
    }
  }
  // Narrow tail interval: uniform proposal against the density at a.
  for (;;) {
    const double z = a + (b - a) * rng.uniform();
    if (z > a && z < b && rng.uniform() <= std::exp(0.5 * (a * a - z * z))) return z;
  }
}

}  // namespace

double normal_cdf(double x) { return 0.5 * std::erfc(-x * kSqrt1_2); }

double normal_cdf_upper(double x) { return 0.5 * std::erfc(x * kSqrt1_2); }

double normal_pdf(double x) { return kInvSqrt2Pi * std::exp(-0.5 * x * x); }

double sample_truncated_normal(const TruncatedNormalSpec& spec, Rng& rng) {
  if (!(spec.sd > 0.0) || !std::isfinite(spec.sd) || !std::isfinite(spec.mean))
    throw input_error("sample_truncated_normal: sd must be positive and parameters finite");
  if (!(spec.lower < spec.upper))
    throw input_error("sample_truncated_normal: empty truncation interval");

  const double a = (spec.lower - spec.mean) / spec.sd;
  const double b = (spec.upper - spec.mean) / spec.sd;

  double z;
  const bool lo = std::isfinite(a);
  const bool hi = std::isfinite(b);
  if (!lo && !hi) {
    z = rng.normal();
  } else if (lo && !hi) {
    z = sample_std_above(a, rng);
  } else if (!lo && hi) {
    z = -sample_std_above(-b, rng);
  } else {
    z = sample_std_interval(a, b, rng);
  }

  double x = spec.mean + spec.sd * z;
  // Guard against rounding onto a finite bound.
  if (lo && x <= spec.lower) x = std::nextafter(spec.lower, spec.upper);
  if (hi && x >= spec.upper) x = std::nextafter(spec.upper, spec.lower);
  return x;
}

double sample_inverse_gamma(double shape, double rate, Rng& rng) {
  if (!(shape > 0.0) || !(rate > 0.0))
    throw input_error("sample_inverse_gamma: shape and rate must be positive");
  return rate / rng.gamma(shape);
}

Eigen::VectorXd sample_mvn_from_precision_factor(const Eigen::VectorXd& mean,
                                                 const Eigen::MatrixXd& chol_lower,
                                                 double sigma2, Rng& rng) {
  const Eigen::Index d = mean.size();
  if (chol_lower.rows() != d || chol_lower.cols() != d)
    throw input_error("sample_mvn_from_precision_factor: dimension mismatch");
  if (!(sigma2 > 0.0) || !std::isfinite(sigma2))
    throw numerical_error("sample_mvn_from_precision_factor: sigma2 not positive finite");
  for (Eigen::Index i = 0; i < d; ++i) {
    const double dii = chol_lower(i, i);
    if (!(dii > 0.0) || !std::isfinite(dii)) {
      std::ostringstream msg;
      msg << "sample_mvn_from_precision_factor: factor diagonal " << i << " is " << dii;
      throw numerical_error(msg.str());
    }
  }

  Eigen::VectorXd u(d);
  for (Eigen::Index i = 0; i < d; ++i) u[i] = rng.normal();
  // x = mean + sigma * L^{-T} u has covariance sigma2 * (L L^T)^{-1}.
  chol_lower.transpose().triangularView<Eigen::Upper>().solveInPlace(u);
  return mean + std::sqrt(sigma2) * u;
}

}  // namespace bsrmm
