#include "bsrmm/simulation.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <limits>
#include <numeric>
#include <sstream>

#include "bsrmm/errors.hpp"

namespace bsrmm {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// 0-based index sets of the dependent design.
std::vector<int> signal_block(int offset) {
  std::vector<int> idx;
  for (int l = 1; l <= 12; ++l) idx.push_back(offset + 20 * l - 1);
  return idx;
}

std::vector<int> noise_block(int offset) {
  std::vector<int> idx;
  for (int l = 1; l <= 16; ++l) idx.push_back(offset + l - 1);
  return idx;
}

void fill_block_covariance(Eigen::MatrixXd& S, const std::vector<int>& idx, double base,
                           double slope) {
  for (size_t a = 0; a < idx.size(); ++a) {
    for (size_t b = a + 1; b < idx.size(); ++b) {
      const double v = base - slope * std::abs(idx[a] - idx[b]);
      S(idx[a], idx[b]) = v;
      S(idx[b], idx[a]) = v;
    }
  }
}

void partial_shuffle(std::vector<int>& v, size_t k, Rng& rng) {
  for (size_t i = 0; i < k && i + 1 < v.size(); ++i) {
    const size_t j = i + static_cast<size_t>(rng.uniform_int(v.size() - i));
    std::swap(v[i], v[j]);
  }
}

}  // namespace

Design parse_design(const std::string& s) {
  if (s == "independent") return Design::independent;
  if (s == "dependent") return Design::dependent;
  throw input_error("unknown design '" + s + "' (expected independent or dependent)");
}

std::string design_name(Design d) {
  return d == Design::independent ? "independent" : "dependent";
}

void validate_scenario(const ScenarioSpec& spec) {
  if (spec.n < 4) throw input_error("scenario: n too small");
  if (spec.design == Design::independent && spec.p < 8)
    throw input_error("scenario: independent design needs p >= 8");
  if (spec.design == Design::dependent && spec.p < 960)
    throw input_error("scenario: dependent design needs p >= 960 (blocks reach index 960)");
  if (!(spec.snr > 0.0)) throw input_error("scenario: snr must be positive");
  if (spec.missing_rate < 0.0 || spec.missing_rate >= 1.0)
    throw input_error("scenario: missing_rate must be in [0,1)");
  if (spec.mnar_fraction < 0.0 || spec.mnar_fraction > 1.0)
    throw input_error("scenario: mnar_fraction must be in [0,1]");
  if (!(spec.train_fraction > 0.0) || spec.train_fraction > 1.0)
    throw input_error("scenario: train_fraction must be in (0,1]");
  if (!(spec.mnar_decay_scale > 0.0))
    throw input_error("scenario: mnar_decay_scale must be positive");
  if (spec.lod_jitter_sd < 0.0) throw input_error("scenario: lod_jitter_sd must be >= 0");
}

CovariateDraw generate_covariates(const ScenarioSpec& spec, Rng& rng) {
  validate_scenario(spec);
  const int n = spec.n, p = spec.p;
  CovariateDraw out;

  Eigen::VectorXd theta = Eigen::VectorXd::Zero(p);
  if (spec.design == Design::independent) {
    for (int j = 0; j < 5; ++j) theta[j] = std::log(0.5 * p);
    out.O.resize(n, p);
    for (int j = 0; j < p; ++j)
      for (int i = 0; i < n; ++i) out.O(i, j) = theta[j] + rng.normal();
  } else {
    const auto sig1 = signal_block(160), sig2 = signal_block(560);
    const auto noi1 = noise_block(444), noi2 = noise_block(944);
    for (int j : sig1) theta[j] = std::log(0.5 * p);
    for (int j : sig2) theta[j] = std::log(0.5 * p);
    for (int j : noi1) theta[j] = std::log(0.25 * p);
    for (int j : noi2) theta[j] = std::log(0.25 * p);

    Eigen::MatrixXd S = Eigen::MatrixXd::Identity(p, p);
    fill_block_covariance(S, sig1, 0.75, 0.0015);
    fill_block_covariance(S, sig2, 0.75, 0.0015);
    fill_block_covariance(S, noi1, 0.4, 0.02);
    fill_block_covariance(S, noi2, 0.4, 0.02);

    Eigen::LLT<Eigen::MatrixXd> llt(S);
    if (llt.info() != Eigen::Success) {
      std::cerr << "warning: dependent-design covariance not positive definite; "
                   "adding 1e-8 diagonal jitter\n";
      S.diagonal().array() += 1e-8;
      llt.compute(S);
      out.jitter_applied = true;
      if (llt.info() != Eigen::Success)
        throw numerical_error("dependent-design covariance not positive definite after jitter");
    }
    const Eigen::MatrixXd L = llt.matrixL();
    Eigen::MatrixXd Zm(n, p);
    for (int j = 0; j < p; ++j)
      for (int i = 0; i < n; ++i) Zm(i, j) = rng.normal();
    out.O.noalias() = Zm * L.transpose();
    out.O.rowwise() += theta.transpose();
  }

  // Log compositions computed directly from the log-sum-exp so rows of U
  // normalize exactly.
  out.X.resize(n, p);
  for (int i = 0; i < n; ++i) {
    const double m = out.O.row(i).maxCoeff();
    const double lse = m + std::log((out.O.row(i).array() - m).exp().sum());
    if (spec.exp2_numerator)
      out.X.row(i) = 2.0 * out.O.row(i).array() - lse;
    else
      out.X.row(i) = out.O.row(i).array() - lse;
  }
  out.U = out.X.array().exp();
  return out;
}

std::pair<Eigen::VectorXd, std::vector<int>> assign_coefficients(const ScenarioSpec& spec) {
  Eigen::VectorXd beta = Eigen::VectorXd::Zero(spec.p);
  std::vector<int> support;
  if (spec.design == Design::independent) {
    if (spec.p < 8) throw input_error("assign_coefficients: p must be >= 8");
    const double vals[8] = {1.0, -0.8, 0.6, 0.0, 0.0, -1.5, -0.5, 1.2};
    for (int j = 0; j < 8; ++j) beta[j] = vals[j];
  } else {
    if (spec.p < 800) throw input_error("assign_coefficients: p must be >= 800");
    const double b1[12] = {0.88, -1.41, -1.39, -1.15, 1.04, 0.51,
                           1.21, -1.95, -1.86, 1.93,  -1.34, -0.85};
    const double b2[12] = {1.76, -1.66, -0.99, 1.48, 0.69, 1.87,
                           -0.54, 0.72, 1.35,  0.67, -0.81, -0.16};
    const auto idx1 = signal_block(160), idx2 = signal_block(560);
    for (int l = 0; l < 12; ++l) beta[idx1[l]] = b1[l];
    for (int l = 0; l < 12; ++l) beta[idx2[l]] = b2[l];
  }
  for (int j = 0; j < spec.p; ++j)
    if (beta[j] != 0.0) support.push_back(j);
  return {beta, support};
}

std::pair<Eigen::VectorXd, double> generate_outcome(const Eigen::MatrixXd& X_raw_logs,
                                                    const Eigen::VectorXd& beta_true,
                                                    const ScenarioSpec& spec, Rng& rng) {
  if (!(spec.snr > 0.0)) throw input_error("generate_outcome: snr must be positive");
  double abs_sum = 0.0;
  int nnz = 0;
  for (int j = 0; j < beta_true.size(); ++j) {
    if (beta_true[j] != 0.0) {
      abs_sum += std::abs(beta_true[j]);
      ++nnz;
    }
  }
  if (nnz == 0) throw input_error("generate_outcome: beta has no nonzero entries");
  const double sigma = (abs_sum / nnz) / spec.snr;

  const int n = static_cast<int>(X_raw_logs.rows());
  Eigen::VectorXd y = X_raw_logs * beta_true;
  y.array() += spec.beta0_true;
  for (int i = 0; i < n; ++i) {
    double eps = rng.normal();
    if (spec.heavy_tail_errors) {
      const double chisq3 = 2.0 * rng.gamma(1.5);
      eps /= std::sqrt(chisq3 / 3.0);
    }
    y[i] += sigma * eps;
  }
  return {y, sigma};
}

MissingnessDraw inject_missingness(const Eigen::VectorXd& y_true, const ScenarioSpec& spec,
                                   Rng& rng) {
  const int n = static_cast<int>(y_true.size());
  const long m_total = std::llround(n * spec.missing_rate);
  const long m_mnar = std::llround(n * spec.missing_rate * spec.mnar_fraction);
  const long m_mar = m_total - m_mnar;
  if (m_mar < 0) throw input_error("inject_missingness: inconsistent rounding of counts");
  if (m_total > n - 1)
    throw input_error("inject_missingness: missing_rate leaves no observed samples");

  // Censoring score; lower scores are censored first.
  Eigen::VectorXd score = y_true;
  if (spec.lod_jitter_sd > 0.0) {
    for (int i = 0; i < n; ++i) score[i] -= spec.lod_jitter_sd * rng.normal();
  }

  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return score[a] < score[b]; });

  MissingnessDraw out;
  out.R = Eigen::VectorXi::Ones(n);
  out.missing_mask = Eigen::VectorXi::Zero(n);
  out.mnar_mask = Eigen::VectorXi::Zero(n);

  std::vector<int> mnar_set;
  if (spec.stochastic_mnar && m_mnar > 0) {
    // Sequential weighted draws; weight decays with distance above the minimum.
    const double mean = y_true.mean();
    const double sd = std::sqrt((y_true.array() - mean).square().sum() / std::max(1, n - 1));
    const double scale = spec.mnar_decay_scale * (sd > 0 ? sd : 1.0);
    const double y_min = y_true.minCoeff();
    std::vector<int> pool = order;
    std::vector<double> w(pool.size());
    for (long k = 0; k < m_mnar; ++k) {
      double total = 0.0;
      for (size_t t = 0; t < pool.size(); ++t) {
        w[t] = std::exp(-(y_true[pool[t]] - y_min) / scale);
        total += w[t];
      }
      double u = rng.uniform() * total;
      size_t pick = 0;
      for (; pick + 1 < pool.size(); ++pick) {
        if (u <= w[pick]) break;
        u -= w[pick];
      }
      mnar_set.push_back(pool[pick]);
      pool.erase(pool.begin() + static_cast<long>(pick));
      w.resize(pool.size());
    }
  } else {
    mnar_set.assign(order.begin(), order.begin() + m_mnar);
  }
  for (int i : mnar_set) {
    out.R[i] = 0;
    out.missing_mask[i] = 1;
    out.mnar_mask[i] = 1;
  }

  // Detection limit: smallest retained value.
  double xi = std::numeric_limits<double>::infinity();
  for (int i = 0; i < n; ++i)
    if (out.R[i] == 1) xi = std::min(xi, y_true[i]);
  out.xi = xi;

  if (m_mar > 0) {
    std::vector<int> candidates;
    for (int i = 0; i < n; ++i)
      if (out.R[i] == 1 && y_true[i] > xi) candidates.push_back(i);
    if (static_cast<long>(candidates.size()) < m_mar)
      throw input_error("inject_missingness: not enough samples above the detection limit");
    partial_shuffle(candidates, static_cast<size_t>(m_mar), rng);
    for (long k = 0; k < m_mar; ++k) {
      const int i = candidates[k];
      out.R[i] = 0;
      out.missing_mask[i] = 1;
    }
  }

  out.y_obs = y_true;
  for (int i = 0; i < n; ++i)
    if (out.R[i] == 0) out.y_obs[i] = kNaN;
  return out;
}

std::pair<std::vector<int>, std::vector<int>> split_train_test(const Eigen::VectorXi& R,
                                                               double train_fraction, Rng& rng) {
  const int n = static_cast<int>(R.size());
  std::vector<int> obs, mis;
  for (int i = 0; i < n; ++i) (R[i] == 1 ? obs : mis).push_back(i);

  auto take = [&](std::vector<int>& pool) {
    long k = std::llround(train_fraction * static_cast<double>(pool.size()));
    if (train_fraction < 1.0 && !pool.empty()) {
      // Keep at least one element on each side of the split.
      k = std::min<long>(k, static_cast<long>(pool.size()) - 1);
      k = std::max<long>(k, 1);
    } else {
      k = static_cast<long>(pool.size());
    }
    partial_shuffle(pool, pool.size(), rng);
    return k;
  };

  std::vector<int> train, test;
  const long k_obs = take(obs);
  for (size_t t = 0; t < obs.size(); ++t)
    (static_cast<long>(t) < k_obs ? train : test).push_back(obs[t]);
  if (!mis.empty()) {
    const long k_mis = take(mis);
    for (size_t t = 0; t < mis.size(); ++t)
      (static_cast<long>(t) < k_mis ? train : test).push_back(mis[t]);
  }
  std::sort(train.begin(), train.end());
  std::sort(test.begin(), test.end());
  return {train, test};
}

Eigen::MatrixXd build_sim_Q(int p) {
  if (p < 960)
    throw input_error("build_sim_Q: requires p >= 960 (fixed block layout up to index 960)");
  Eigen::MatrixXd Q = Eigen::MatrixXd::Constant(p, p, 0.001);
  Q.diagonal().setZero();
  const std::vector<std::vector<int>> blocks = {signal_block(160), signal_block(560),
                                                noise_block(44), noise_block(444),
                                                noise_block(944)};
  for (const auto& blk : blocks) {
    for (size_t a = 0; a < blk.size(); ++a) {
      for (size_t b = 0; b < blk.size(); ++b) {
        if (a != b) Q(blk[a], blk[b]) = 2.001;
      }
    }
  }
  return Q;
}

Standardization standardize_columns(Eigen::MatrixXd& X) {
  const int n = static_cast<int>(X.rows());
  if (n < 2) throw input_error("standardize_columns: need at least 2 rows");
  Standardization s;
  s.mean = X.colwise().mean();
  X.rowwise() -= s.mean.transpose();
  s.sd = (X.colwise().squaredNorm() / (n - 1.0)).cwiseSqrt();
  for (int j = 0; j < X.cols(); ++j) {
    if (!(s.sd[j] > 0.0)) {
      std::ostringstream msg;
      msg << "standardize_columns: column " << j << " has zero variance";
      throw input_error(msg.str());
    }
  }
  X.array().rowwise() /= s.sd.transpose().array();
  return s;
}

void apply_standardization(Eigen::MatrixXd& X, const Standardization& s) {
  X.rowwise() -= s.mean.transpose();
  X.array().rowwise() /= s.sd.transpose().array();
}

ReplicateData make_replicate(const ScenarioSpec& spec) {
  validate_scenario(spec);
  Rng rng(spec.seed);
  ReplicateData rep;

  CovariateDraw cov = generate_covariates(spec, rng);
  auto [beta, support] = assign_coefficients(spec);
  auto [y, sigma] = generate_outcome(cov.X, beta, spec, rng);
  MissingnessDraw miss = inject_missingness(y, spec, rng);
  auto [train_idx, test_idx] = split_train_test(miss.R, spec.train_fraction, rng);

  rep.truth.beta_true = std::move(beta);
  rep.truth.beta0_true = spec.beta0_true;
  rep.truth.sigma_true = sigma;
  rep.truth.y_true = std::move(y);
  rep.truth.R = miss.R;
  rep.truth.missing_mask = miss.missing_mask;
  rep.truth.mnar_mask = miss.mnar_mask;
  rep.truth.xi = miss.xi;
  rep.truth.train_idx = train_idx;
  rep.truth.test_idx = test_idx;
  rep.truth.support = std::move(support);

  const int n_train = static_cast<int>(train_idx.size());
  const int n_test = static_cast<int>(test_idx.size());

  Eigen::MatrixXd X_train(n_train, spec.p);
  for (int t = 0; t < n_train; ++t) X_train.row(t) = cov.X.row(train_idx[t]);
  const Standardization st = standardize_columns(X_train);

  rep.train.X = std::move(X_train);
  rep.train.n = n_train;
  rep.train.p = spec.p;
  rep.train.y_obs.resize(n_train);
  rep.train.R.resize(n_train);
  double xi_train = std::numeric_limits<double>::infinity();
  for (int t = 0; t < n_train; ++t) {
    const int i = train_idx[t];
    rep.train.R[t] = miss.R[i];
    rep.train.y_obs[t] = miss.R[i] == 1 ? rep.truth.y_true[i] : kNaN;
    if (miss.R[i] == 1) xi_train = std::min(xi_train, rep.truth.y_true[i]);
  }
  rep.train.xi = xi_train;  // detection limit as the analyst would set it

  rep.X_test.resize(n_test, spec.p);
  rep.y_test.resize(n_test);
  rep.R_test.resize(n_test);
  for (int t = 0; t < n_test; ++t) {
    const int i = test_idx[t];
    rep.X_test.row(t) = cov.X.row(i);
    rep.y_test[t] = rep.truth.y_true[i];
    rep.R_test[t] = miss.R[i];
  }
  if (n_test > 0) apply_standardization(rep.X_test, st);

  if (spec.design == Design::dependent) rep.Q = build_sim_Q(spec.p);
  rep.X_raw = std::move(cov.X);
  return rep;
}

}  // namespace bsrmm
