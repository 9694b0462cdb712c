#include "bsrmm/model.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "bsrmm/distributions.hpp"
#include "bsrmm/errors.hpp"

namespace bsrmm {

namespace {

// gamma-independent part of the collapsed log marginal, kept so that the
// returned value is the full log p(y | gamma) and can be checked against a
// quadrature oracle in absolute terms.
double collapsed_constant(int n, const Hyperparameters& hp) {
  const double half_nu = 0.5 * hp.nu;
  return -0.5 * n * std::log(2.0 * M_PI) - 0.5 * std::log(n + 1.0) +
         half_nu * std::log(half_nu * hp.omega) - std::lgamma(half_nu) +
         std::lgamma(0.5 * (n + hp.nu)) + 0.5 * (n + hp.nu) * std::log(2.0);
}

CollapsedQuantities collapsed_core(const Eigen::MatrixXd& G_sub, const Eigen::VectorXd& v_sub,
                                   double yKy, int n, const Hyperparameters& hp,
                                   const std::vector<int>& active) {
  const int pg = static_cast<int>(active.size());
  CollapsedQuantities out;

  double logdet_a = 0.0;
  double fit = 0.0;
  if (pg > 0) {
    const double c2 = hp.c * hp.c;
    Eigen::MatrixXd a = G_sub;
    a.array() += c2 / hp.tau2;
    a.diagonal().array() += 1.0 / hp.tau2;

    Eigen::LLT<Eigen::MatrixXd> llt(a);
    if (llt.info() != Eigen::Success) {
      std::ostringstream msg;
      msg << "collapsed model: a_gamma not positive definite for p_gamma=" << pg << " (active";
      for (int j : active) msg << ' ' << j;
      msg << "; diag range [" << a.diagonal().minCoeff() << ", " << a.diagonal().maxCoeff()
          << "])";
      throw numerical_error(msg.str());
    }
    out.a_gamma = std::move(a);
    out.a_gamma_chol = llt.matrixL();

    Eigen::VectorXd z = v_sub;
    out.a_gamma_chol.triangularView<Eigen::Lower>().solveInPlace(z);
    fit = z.squaredNorm();
    out.beta_hat = z;
    out.a_gamma_chol.transpose().triangularView<Eigen::Upper>().solveInPlace(out.beta_hat);

    logdet_a = 2.0 * out.a_gamma_chol.diagonal().array().log().sum();
  }

  double C = yKy - fit;
  if (C < 0.0) {
    if (C < -1e-8) {
      std::ostringstream msg;
      msg << "collapsed model: residual quadratic form " << C << " (p_gamma=" << pg << ")";
      throw numerical_error(msg.str());
    }
    C = 0.0;
  }
  out.c_gamma = C;

  const double c2 = hp.c * hp.c;
  const double logdet_prior = pg > 0
      ? std::log1p(c2 * pg) - pg * std::log(hp.tau2)
      : 0.0;
  out.log_marginal = collapsed_constant(n, hp) + 0.5 * logdet_prior - 0.5 * logdet_a -
                     0.5 * (n + hp.nu) * std::log(C + hp.nu * hp.omega);
  return out;
}

}  // namespace

Eigen::MatrixXd gram_inverse_zprior(int p_gamma, double c) {
  if (p_gamma < 1) throw input_error("gram_inverse_zprior: p_gamma must be >= 1");
  const double c2 = c * c;
  Eigen::MatrixXd M = Eigen::MatrixXd::Identity(p_gamma, p_gamma);
  M.array() -= c2 / (1.0 + c2 * p_gamma);
  return M;
}

void ResponseCache::init(const Eigen::MatrixXd& X_in) {
  X = &X_in;
  n = static_cast<int>(X_in.rows());
  col_sum = X_in.colwise().sum();
  G.noalias() = X_in.transpose() * X_in;
  G.noalias() -= col_sum * (col_sum.transpose() / (n + 1.0));
}

void ResponseCache::refresh_response(const Eigen::VectorXd& y) {
  y_sum = y.sum();
  v.noalias() = X->transpose() * y;
  v.noalias() -= col_sum * (y_sum / (n + 1.0));
  yKy = y.squaredNorm() - y_sum * y_sum / (n + 1.0);
}

CollapsedQuantities compute_collapsed_cached(const ResponseCache& cache,
                                             const std::vector<int>& active,
                                             const Hyperparameters& hp) {
  const int pg = static_cast<int>(active.size());
  Eigen::MatrixXd G_sub(pg, pg);
  Eigen::VectorXd v_sub(pg);
  for (int j = 0; j < pg; ++j) {
    v_sub[j] = cache.v[active[j]];
    for (int i = 0; i < pg; ++i) G_sub(i, j) = cache.G(active[i], active[j]);
  }
  return collapsed_core(G_sub, v_sub, cache.yKy, cache.n, hp, active);
}

CollapsedQuantities compute_collapsed(const Dataset& dataset, const Eigen::VectorXd& y,
                                      const SelectionState& selection,
                                      const Hyperparameters& hp) {
  if (y.size() != dataset.n) throw input_error("compute_collapsed: response length mismatch");
  if (!y.allFinite()) throw input_error("compute_collapsed: response not finite");
  const int n = dataset.n;
  const int pg = selection.p_gamma;

  const double y_sum = y.sum();
  const double yKy = y.squaredNorm() - y_sum * y_sum / (n + 1.0);

  Eigen::MatrixXd Xg(n, pg);
  for (int j = 0; j < pg; ++j) Xg.col(j) = dataset.X.col(selection.active[j]);
  const Eigen::VectorXd s = Xg.colwise().sum();
  Eigen::MatrixXd G_sub = Xg.transpose() * Xg;
  G_sub.noalias() -= s * (s.transpose() / (n + 1.0));
  Eigen::VectorXd v_sub = Xg.transpose() * y - s * (y_sum / (n + 1.0));

  return collapsed_core(G_sub, v_sub, yKy, n, hp, selection.active);
}

double bayes_factor_flip(const Dataset& dataset, const Eigen::VectorXd& y,
                         const SelectionState& selection, const Hyperparameters& hp, int r) {
  if (r < 0 || r >= dataset.p) throw input_error("bayes_factor_flip: feature index out of range");
  const bool in = selection.gamma[r] != 0;
  SelectionState flipped = SelectionState::from_active(
      dataset.p, in ? active_without(selection.active, r) : active_with(selection.active, r));
  const CollapsedQuantities cur = compute_collapsed(dataset, y, selection, hp);
  const CollapsedQuantities flip = compute_collapsed(dataset, y, flipped, hp);
  return flip.log_marginal - cur.log_marginal;
}

double ising_conditional_log_odds(const SelectionState& selection, const Hyperparameters& hp,
                                  int r) {
  double pair_sum = 0.0;
  if (hp.ising_Q.size() != 0) {
    for (int j : selection.active) {
      if (j != r) pair_sum += hp.ising_Q(r, j);
    }
  }
  const double factor = hp.ising_double_count ? 2.0 : 1.0;
  return hp.ising_a[r] + factor * pair_sum;
}

double mnar_posterior_probability(double mu_i, double sigma, double xi, double theta) {
  if (!(sigma > 0.0)) throw input_error("mnar_posterior_probability: sigma must be positive");
  if (theta < 0.0 || theta > 1.0)
    throw input_error("mnar_posterior_probability: theta outside [0,1]");
  if (theta == 0.0) return 1.0;  // all missingness is MNAR
  const double t = (xi - mu_i) / sigma;
  const double below = normal_cdf_upper(-t);  // P(y <= xi)
  const double above = normal_cdf_upper(t);   // P(y > xi)
  if (below == 0.0) return 0.0;
  if (above == 0.0) return 1.0;
  return below / (below + theta * above);
}

double inclusion_probability(double prior_log_odds, double log_bf_inclusion) {
  const double x = prior_log_odds + log_bf_inclusion;
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

std::vector<int> active_with(const std::vector<int>& active, int r) {
  std::vector<int> out;
  out.reserve(active.size() + 1);
  auto it = std::lower_bound(active.begin(), active.end(), r);
  out.insert(out.end(), active.begin(), it);
  out.push_back(r);
  out.insert(out.end(), it, active.end());
  return out;
}

std::vector<int> active_without(const std::vector<int>& active, int r) {
  std::vector<int> out;
  out.reserve(active.size());
  for (int j : active)
    if (j != r) out.push_back(j);
  return out;
}

}  // namespace bsrmm
