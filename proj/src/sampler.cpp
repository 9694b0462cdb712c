#include "bsrmm/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "bsrmm/distributions.hpp"
#include "bsrmm/errors.hpp"

namespace bsrmm {

ImputeMode parse_impute_mode(const std::string& s) {
  if (s == "model") return ImputeMode::model;
  if (s == "mean") return ImputeMode::mean;
  if (s == "half_min") return ImputeMode::half_min;
  throw input_error("unknown impute_mode '" + s + "' (expected model, mean or half_min)");
}

std::string impute_mode_name(ImputeMode m) {
  switch (m) {
    case ImputeMode::model: return "model";
    case ImputeMode::mean: return "mean";
    case ImputeMode::half_min: return "half_min";
  }
  return "?";
}

void validate_sampler_config(const SamplerConfig& cfg) {
  if (cfg.n_iterations <= 0) throw input_error("sampler: n_iterations must be positive");
  if (cfg.burn_in < 0 || cfg.burn_in >= cfg.n_iterations)
    throw input_error("sampler: burn_in must satisfy 0 <= burn_in < n_iterations");
  if (cfg.gamma_updates_per_sweep < 0)
    throw input_error("sampler: gamma_updates_per_sweep must be >= 0 (0 = p)");
  if (cfg.thin <= 0) throw input_error("sampler: thin must be positive");
}

Eigen::VectorXd ChainSummary::beta_model_averaged() const {
  return ppi.cwiseProduct(beta_mean);
}

GibbsEngine::GibbsEngine(const Dataset& dataset, const Hyperparameters& hp,
                         const SamplerConfig& cfg)
    : ds_(dataset), hp_(hp), cfg_(cfg), rng_(cfg.seed) {
  hp_.bind(ds_.p);
  validate_sampler_config(cfg_);
  xi_eff_ = hp_.lod_scale * ds_.xi;

  for (int i = 0; i < ds_.n; ++i)
    if (ds_.R[i] == 0) missing_.push_back(i);

  double obs_sum = 0.0;
  int n_obs = 0;
  for (int i = 0; i < ds_.n; ++i) {
    if (ds_.R[i] == 1) {
      obs_sum += ds_.y_obs[i];
      ++n_obs;
    }
  }
  const double obs_mean = obs_sum / n_obs;

  mis_.y_latent = ds_.y_obs;
  mis_.Z = Eigen::VectorXi::Zero(ds_.n);
  mis_.theta = 0.5;

  double fill = obs_mean;
  if (cfg_.impute_mode == ImputeMode::half_min) fill = ds_.xi - std::log(2.0);
  for (int i : missing_) {
    mis_.y_latent[i] = fill;
    mis_.Z[i] = fill <= xi_eff_ ? 1 : 0;
  }

  // Single imputation modes freeze the filled values; a fully observed
  // outcome makes every mode identical to "model" with nothing to update.
  missingness_active_ = cfg_.impute_mode == ImputeMode::model && !missing_.empty();

  sel_ = SelectionState::empty(ds_.p);
  reg_.beta0 = 0.0;
  reg_.sigma2 = 1.0;
  reg_.beta_active.resize(0);

  cache_.init(ds_.X);
  refresh_after_response_change();
}

void GibbsEngine::refresh_after_response_change() {
  cache_.refresh_response(mis_.y_latent);
  col_ = compute_collapsed_cached(cache_, sel_.active, hp_);
}

double GibbsEngine::gamma_inclusion_probability(int r) const {
  const bool in = sel_.gamma[r] != 0;
  const CollapsedQuantities other = compute_collapsed_cached(
      cache_, in ? active_without(sel_.active, r) : active_with(sel_.active, r), hp_);
  const double lm_in = in ? col_.log_marginal : other.log_marginal;
  const double lm_out = in ? other.log_marginal : col_.log_marginal;
  return inclusion_probability(ising_conditional_log_odds(sel_, hp_, r), lm_in - lm_out);
}

void GibbsEngine::update_gamma(int count) {
  for (int t = 0; t < count; ++t) {
    const int r = static_cast<int>(rng_.uniform_int(ds_.p));
    const bool in = sel_.gamma[r] != 0;
    CollapsedQuantities other = compute_collapsed_cached(
        cache_, in ? active_without(sel_.active, r) : active_with(sel_.active, r), hp_);
    const double lm_in = in ? col_.log_marginal : other.log_marginal;
    const double lm_out = in ? other.log_marginal : col_.log_marginal;
    const double p1 =
        inclusion_probability(ising_conditional_log_odds(sel_, hp_, r), lm_in - lm_out);
    const bool newval = rng_.bernoulli(p1);
    ++gamma_updates_;
    if (newval != in) {
      sel_ = SelectionState::from_active(
          ds_.p, newval ? active_with(sel_.active, r) : active_without(sel_.active, r));
      col_ = std::move(other);
      ++gamma_flips_;
    }
  }
}

void GibbsEngine::update_regression() {
  const int n = ds_.n;
  reg_.sigma2 = sample_inverse_gamma(0.5 * (n + hp_.nu),
                                     0.5 * (col_.c_gamma + hp_.nu * hp_.omega), rng_);
  if (sel_.p_gamma > 0) {
    reg_.beta_active =
        sample_mvn_from_precision_factor(col_.beta_hat, col_.a_gamma_chol, reg_.sigma2, rng_);
  } else {
    reg_.beta_active.resize(0);
  }
  double fit_sum = 0.0;
  for (int j = 0; j < sel_.p_gamma; ++j)
    fit_sum += cache_.col_sum[sel_.active[j]] * reg_.beta_active[j];
  const double mean_b0 = (cache_.y_sum - fit_sum) / (n + 1.0);
  reg_.beta0 = mean_b0 + std::sqrt(reg_.sigma2 / (n + 1.0)) * rng_.normal();
}

void GibbsEngine::update_missingness() {
  if (missing_.empty()) return;
  const double sigma = std::sqrt(reg_.sigma2);
  for (int i : missing_) {
    double mu = reg_.beta0;
    for (int j = 0; j < sel_.p_gamma; ++j) mu += ds_.X(i, sel_.active[j]) * reg_.beta_active[j];
    const double p_mnar = mnar_posterior_probability(mu, sigma, xi_eff_, mis_.theta);
    mis_.Z[i] = rng_.bernoulli(p_mnar) ? 1 : 0;
    TruncatedNormalSpec spec;
    spec.mean = mu;
    spec.sd = sigma;
    if (mis_.Z[i] == 1)
      spec.upper = xi_eff_;
    else
      spec.lower = xi_eff_;
    mis_.y_latent[i] = sample_truncated_normal(spec, rng_);
  }
  refresh_after_response_change();
}

void GibbsEngine::update_theta() {
  double miss_above = 0.0, obs_above = 0.0;
  for (int i = 0; i < ds_.n; ++i) {
    if (mis_.y_latent[i] > xi_eff_) {
      if (ds_.R[i] == 0)
        miss_above += 1.0;
      else
        obs_above += 1.0;
    }
  }
  mis_.theta = rng_.beta(miss_above + 1.0, obs_above + 1.0);
}

void GibbsEngine::sweep() {
  const int k = cfg_.gamma_updates_per_sweep > 0 ? cfg_.gamma_updates_per_sweep : ds_.p;
  update_gamma(k);
  update_regression();
  if (missingness_active_) {
    update_missingness();
    update_theta();
  }
}

void GibbsEngine::set_response(const Eigen::VectorXd& y_full, const Eigen::VectorXi& R) {
  if (y_full.size() != ds_.n || R.size() != ds_.n)
    throw input_error("set_response: length mismatch");
  missing_.clear();
  for (int i = 0; i < ds_.n; ++i)
    if (R[i] == 0) missing_.push_back(i);
  ds_.y_obs = y_full;
  ds_.R = R;
  mis_.y_latent = y_full;
  for (int i : missing_) mis_.Z[i] = y_full[i] <= xi_eff_ ? 1 : 0;
  missingness_active_ = cfg_.impute_mode == ImputeMode::model && !missing_.empty();
  refresh_after_response_change();
}

void GibbsEngine::set_selection(const std::vector<int>& active) {
  sel_ = SelectionState::from_active(ds_.p, active);
  col_ = compute_collapsed_cached(cache_, sel_.active, hp_);
}

void GibbsEngine::set_regression(double beta0, const Eigen::VectorXd& beta_active,
                                 double sigma2) {
  if (beta_active.size() != sel_.p_gamma)
    throw input_error("set_regression: beta length mismatch");
  reg_.beta0 = beta0;
  reg_.beta_active = beta_active;
  reg_.sigma2 = sigma2;
}

void GibbsEngine::set_theta(double theta) {
  if (!(theta > 0.0 && theta < 1.0)) throw input_error("set_theta: theta outside (0,1)");
  mis_.theta = theta;
}

double GibbsEngine::log_posterior() const {
  double prior = 0.0;
  const double factor = hp_.ising_double_count ? 2.0 : 1.0;
  for (size_t a = 0; a < sel_.active.size(); ++a) {
    const int j = sel_.active[a];
    prior += hp_.ising_a[j];
    if (hp_.ising_Q.size() != 0) {
      for (size_t b = a + 1; b < sel_.active.size(); ++b)
        prior += factor * hp_.ising_Q(j, sel_.active[b]);
    }
  }
  return col_.log_marginal + prior;
}

double draw_quantile(std::vector<double> draws, double q) {
  if (draws.empty()) return 0.0;
  std::sort(draws.begin(), draws.end());
  const double h = q * (static_cast<double>(draws.size()) - 1.0);
  const size_t lo = static_cast<size_t>(h);
  if (lo + 1 >= draws.size()) return draws.back();
  const double w = h - static_cast<double>(lo);
  return draws[lo] * (1.0 - w) + draws[lo + 1] * w;
}

ChainSummary run_chain(const Dataset& dataset, const Hyperparameters& hp,
                       const SamplerConfig& cfg) {
  GibbsEngine eng(dataset, hp, cfg);
  const int p = dataset.p;

  ChainSummary out;
  out.missing_indices = eng.missing_indices();
  const int n_missing = static_cast<int>(out.missing_indices.size());

  Eigen::VectorXi incl_count = Eigen::VectorXi::Zero(p);
  std::vector<std::vector<double>> beta_draws(p);
  std::vector<std::vector<double>> y_draws(n_missing);
  double beta0_acc = 0.0, sigma2_acc = 0.0, theta_acc = 0.0;
  int n_draws = 0;
  double env_max = 0.0;

  int sweep_idx = 0;
  try {
    for (sweep_idx = 0; sweep_idx < cfg.n_iterations; ++sweep_idx) {
      eng.sweep();

      if (cfg.store_traces) {
        out.trace_p_gamma.push_back(eng.selection().p_gamma);
        out.trace_beta0.push_back(eng.regression().beta0);
        out.trace_sigma2.push_back(eng.regression().sigma2);
        out.trace_theta.push_back(eng.missingness().theta);
        out.trace_log_post.push_back(eng.log_posterior());
        std::vector<std::pair<int, double>> row;
        row.reserve(eng.selection().p_gamma);
        for (int j = 0; j < eng.selection().p_gamma; ++j)
          row.emplace_back(eng.selection().active[j], eng.regression().beta_active[j]);
        out.trace_beta.push_back(std::move(row));
      }

      if (sweep_idx < cfg.burn_in) continue;
      if ((sweep_idx - cfg.burn_in) % cfg.thin != 0) continue;

      const SelectionState& sel = eng.selection();
      const RegressionState& reg = eng.regression();
      ++n_draws;
      double beta_sum = 0.0;
      for (int j = 0; j < sel.p_gamma; ++j) {
        incl_count[sel.active[j]] += 1;
        beta_draws[sel.active[j]].push_back(reg.beta_active[j]);
        beta_sum += reg.beta_active[j];
      }
      if (sel.p_gamma > 0) {
        const double c2 = hp.c * hp.c;
        const double env = std::sqrt(sel.p_gamma / (1.0 + c2 * sel.p_gamma)) *
                           std::sqrt(reg.sigma2 * hp.tau2);
        env_max = std::max(env_max, std::abs(beta_sum) / env);
      }
      beta0_acc += reg.beta0;
      sigma2_acc += reg.sigma2;
      theta_acc += eng.missingness().theta;
      for (int m = 0; m < n_missing; ++m)
        y_draws[m].push_back(eng.missingness().y_latent[out.missing_indices[m]]);
    }
  } catch (const std::exception& e) {
    std::ostringstream msg;
    msg << e.what() << " [sweep " << sweep_idx << ", p_gamma=" << eng.selection().p_gamma
        << ", sigma2=" << eng.regression().sigma2 << ", theta=" << eng.missingness().theta
        << "]";
    if (dynamic_cast<const input_error*>(&e)) throw input_error(msg.str());
    throw numerical_error(msg.str());
  }

  out.ppi = incl_count.cast<double>() / static_cast<double>(n_draws);
  out.beta_mean = Eigen::VectorXd::Zero(p);
  out.beta_ci_lower = Eigen::VectorXd::Zero(p);
  out.beta_ci_upper = Eigen::VectorXd::Zero(p);
  for (int j = 0; j < p; ++j) {
    if (beta_draws[j].empty()) continue;
    double s = 0.0;
    for (double b : beta_draws[j]) s += b;
    out.beta_mean[j] = s / static_cast<double>(beta_draws[j].size());
    out.beta_ci_lower[j] = draw_quantile(beta_draws[j], 0.025);
    out.beta_ci_upper[j] = draw_quantile(beta_draws[j], 0.975);
    if (out.ppi[j] > 0.5) out.selected.push_back(j);
  }
  out.beta0_mean = beta0_acc / n_draws;
  out.sigma2_mean = sigma2_acc / n_draws;
  out.theta_mean = eng.missingness_active() ? theta_acc / n_draws : 0.5;

  out.y_imputed_mean.resize(n_missing);
  out.y_imputed_ci_lower.resize(n_missing);
  out.y_imputed_ci_upper.resize(n_missing);
  for (int m = 0; m < n_missing; ++m) {
    double s = 0.0;
    for (double v : y_draws[m]) s += v;
    out.y_imputed_mean[m] = s / static_cast<double>(y_draws[m].size());
    out.y_imputed_ci_lower[m] = draw_quantile(y_draws[m], 0.025);
    out.y_imputed_ci_upper[m] = draw_quantile(y_draws[m], 0.975);
  }

  out.gamma_updates = eng.gamma_updates();
  out.gamma_flips = eng.gamma_flips();
  out.n_draws = n_draws;
  out.zero_sum_envelope_max = env_max;
  return out;
}

}  // namespace bsrmm
