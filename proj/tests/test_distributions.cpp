#include <doctest.h>

#include <cmath>
#include <limits>
#include <vector>

#include "bsrmm/distributions.hpp"
#include "bsrmm/errors.hpp"
#include "bsrmm/rng.hpp"
#include "oracles.hpp"

using namespace bsrmm;

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();

std::vector<double> draw_truncated(const TruncatedNormalSpec& spec, int count, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<double> out(count);
  for (int i = 0; i < count; ++i) out[i] = sample_truncated_normal(spec, rng);
  return out;
}
}  // namespace

TEST_CASE("normal_cdf reference values") {
  CHECK(normal_cdf(0.0) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(normal_cdf(8.0) >= 1.0 - 1e-14);
  CHECK(normal_cdf(-1.959963985) == doctest::Approx(0.025).epsilon(1e-9 / 0.025));
  // Symmetry and monotonicity on a dense grid.
  double prev = -1.0;
  for (int k = -800; k <= 800; ++k) {
    const double x = k / 100.0;
    const double f = normal_cdf(x);
    CHECK(f >= prev);
    CHECK(std::abs(f + normal_cdf(-x) - 1.0) <= 1e-12);
    prev = f;
  }
}

TEST_CASE("truncated normal: untruncated marginal matches standard normal") {
  TruncatedNormalSpec spec;  // defaults: mean 0, sd 1, unbounded
  const int n = 100000;
  auto draws = draw_truncated(spec, n, 11);
  const double m = oracle::mean(draws);
  CHECK(std::abs(m) <= 3.0 / std::sqrt(static_cast<double>(n)));
}

TEST_CASE("truncated normal: deep lower truncation matches the Mills-ratio mean") {
  TruncatedNormalSpec spec;
  spec.lower = 5.0;
  const int n = 100000;
  auto draws = draw_truncated(spec, n, 12);
  for (double d : draws) CHECK(d > 5.0);
  const double expect = oracle::truncated_mean_lower(5.0);
  CHECK(expect == doctest::Approx(5.1865).epsilon(1e-4));
  const double se = oracle::sample_sd(draws) / std::sqrt(static_cast<double>(n));
  CHECK(std::abs(oracle::mean(draws) - expect) <= 3.0 * se);
}

TEST_CASE("truncated normal: upper-truncated half normal mean") {
  TruncatedNormalSpec spec;
  spec.mean = 2.5;
  spec.sd = 1.7;
  spec.upper = 2.5;
  const int n = 100000;
  auto draws = draw_truncated(spec, n, 13);
  for (double d : draws) CHECK(d < 2.5);
  const double expect = 2.5 - 1.7 * std::sqrt(2.0 / M_PI);
  const double se = oracle::sample_sd(draws) / std::sqrt(static_cast<double>(n));
  CHECK(std::abs(oracle::mean(draws) - expect) <= 3.0 * se);
}

TEST_CASE("truncated normal: draws stay strictly inside the interval") {
  struct Case {
    double mean, sd, lower, upper;
  };
  const Case cases[] = {
      {0.0, 1.0, 8.0, kInf},     // (mean-lower)/sd = -8, deep upper tail
      {0.0, 1.0, -kInf, -8.0},   // deep lower tail
      {0.0, 1.0, -8.0, kInf},    // (mean-lower)/sd = +8, nearly unconstrained
      {1.0, 2.0, 0.5, 1.5},      // two-sided around the mode
      {0.0, 1.0, 8.0, 8.5},      // narrow two-sided deep tail
      {-3.0, 0.5, -3.1, -2.9},   // narrow two-sided around the mode
  };
  int case_idx = 0;
  for (const auto& c : cases) {
    TruncatedNormalSpec spec{c.mean, c.sd, c.lower, c.upper};
    Rng rng(100 + case_idx++);
    const int n = 200000;
    bool inside = true;
    for (int i = 0; i < n; ++i) {
      const double x = sample_truncated_normal(spec, rng);
      inside = inside && x > c.lower && x < c.upper;
    }
    CHECK(inside);
  }
}

TEST_CASE("truncated normal: KS agreement with the analytic truncated CDF") {
  struct Case {
    double mean, sd, lower, upper;
  };
  const Case cases[] = {
      {0.0, 1.0, -1.0, kInf}, {0.0, 1.0, 2.0, kInf},  {1.5, 0.5, -kInf, 1.0},
      {0.0, 1.0, 8.0, kInf},  {0.0, 1.0, -0.5, 0.75}, {0.0, 1.0, 8.0, 9.0},
  };
  int seed = 500;
  for (const auto& c : cases) {
    TruncatedNormalSpec spec{c.mean, c.sd, c.lower, c.upper};
    auto draws = draw_truncated(spec, 10000, seed++);
    const double d = oracle::ks_statistic(draws, [&](double x) {
      return oracle::truncated_cdf(x, c.mean, c.sd, c.lower, c.upper);
    });
    CHECK(d < oracle::ks_critical_1pct(draws.size()));
  }
}

TEST_CASE("truncated normal: invalid specs are input errors") {
  Rng rng(1);
  TruncatedNormalSpec bad_sd;
  bad_sd.sd = 0.0;
  CHECK_THROWS_AS(sample_truncated_normal(bad_sd, rng), input_error);
  TruncatedNormalSpec empty;
  empty.lower = 2.0;
  empty.upper = 2.0;
  CHECK_THROWS_AS(sample_truncated_normal(empty, rng), input_error);
}

TEST_CASE("inverse gamma: mean and domain errors") {
  Rng rng(21);
  const int n = 100000;
  std::vector<double> draws(n);
  for (int i = 0; i < n; ++i) draws[i] = sample_inverse_gamma(3.0, 2.0, rng);
  const double se = oracle::sample_sd(draws) / std::sqrt(static_cast<double>(n));
  CHECK(std::abs(oracle::mean(draws) - 1.0) <= 3.0 * se);

  CHECK_THROWS_AS(sample_inverse_gamma(0.0, 1.0, rng), input_error);
  CHECK_THROWS_AS(sample_inverse_gamma(1.0, -1.0, rng), input_error);
}

TEST_CASE("seed determinism across all samplers") {
  auto run = [](std::uint64_t seed) {
    Rng rng(seed);
    std::vector<double> vals;
    TruncatedNormalSpec tail;
    tail.lower = 6.0;
    vals.push_back(sample_truncated_normal(tail, rng));
    vals.push_back(sample_inverse_gamma(2.5, 1.5, rng));
    vals.push_back(rng.beta(3.0, 4.0));
    vals.push_back(rng.normal());
    Eigen::MatrixXd L(2, 2);
    L << 2, 0, 1, 1.5;
    Eigen::VectorXd mu(2);
    mu << 0.5, -0.25;
    const Eigen::VectorXd x = sample_mvn_from_precision_factor(mu, L, 0.7, rng);
    vals.push_back(x[0]);
    vals.push_back(x[1]);
    return vals;
  };
  const auto a = run(987654321);
  const auto b = run(987654321);
  for (size_t i = 0; i < a.size(); ++i) CHECK(a[i] == b[i]);
}

TEST_CASE("mvn from precision factor: scalar, identity and 2x2 cases") {
  Rng rng(31);
  const int n = 100000;

  // a = [4], sigma2 = 1: variance 0.25.
  {
    Eigen::MatrixXd L(1, 1);
    L << 2.0;
    Eigen::VectorXd mu = Eigen::VectorXd::Zero(1);
    std::vector<double> draws(n);
    for (int i = 0; i < n; ++i) draws[i] = sample_mvn_from_precision_factor(mu, L, 1.0, rng)[0];
    const double sd = oracle::sample_sd(draws);
    const double var = sd * sd;
    const double se_var = var * std::sqrt(2.0 / (n - 1.0));
    CHECK(std::abs(var - 0.25) <= 3.0 * se_var);
  }

  // Identity precision: empirical covariance close to identity.
  {
    Eigen::MatrixXd L = Eigen::MatrixXd::Identity(3, 3);
    Eigen::VectorXd mu = Eigen::VectorXd::Zero(3);
    Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(3, 3);
    const int m = 50000;
    for (int i = 0; i < m; ++i) {
      const Eigen::VectorXd x = sample_mvn_from_precision_factor(mu, L, 1.0, rng);
      cov.noalias() += x * x.transpose();
    }
    cov /= static_cast<double>(m);
    const double tol = 3.0 / std::sqrt(static_cast<double>(m));
    for (int a = 0; a < 3; ++a)
      for (int b = 0; b < 3; ++b) CHECK(std::abs(cov(a, b) - (a == b ? 1.0 : 0.0)) <= 2.0 * tol);
  }

  // a = [[2,1],[1,2]]: covariance sigma2 * [[2/3,-1/3],[-1/3,2/3]].
  {
    Eigen::MatrixXd a(2, 2);
    a << 2, 1, 1, 2;
    const Eigen::MatrixXd L = a.llt().matrixL();
    Eigen::VectorXd mu = Eigen::VectorXd::Zero(2);
    const double sigma2 = 1.7;
    Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(2, 2);
    const int m = 200000;
    for (int i = 0; i < m; ++i) {
      const Eigen::VectorXd x = sample_mvn_from_precision_factor(mu, L, sigma2, rng);
      cov.noalias() += x * x.transpose();
    }
    cov /= static_cast<double>(m);
    Eigen::MatrixXd expect(2, 2);
    expect << 2.0 / 3.0, -1.0 / 3.0, -1.0 / 3.0, 2.0 / 3.0;
    expect *= sigma2;
    for (int r = 0; r < 2; ++r)
      for (int c = 0; c < 2; ++c)
        CHECK(std::abs(cov(r, c) - expect(r, c)) <= 4.0 * sigma2 / std::sqrt(double(m)) * 2.0);
  }

  // Singular factor is a numerical error.
  {
    Eigen::MatrixXd L = Eigen::MatrixXd::Zero(2, 2);
    Eigen::VectorXd mu = Eigen::VectorXd::Zero(2);
    CHECK_THROWS_AS(sample_mvn_from_precision_factor(mu, L, 1.0, rng), numerical_error);
  }
}
