#include "bsrmm/metrics.hpp"

#include <cmath>
#include <set>

#include "bsrmm/errors.hpp"

namespace bsrmm {

double prediction_error(const Eigen::VectorXd& y_test, const Eigen::VectorXd& y_pred,
                        const Eigen::VectorXi& R_test) {
  if (y_test.size() != y_pred.size() || y_test.size() != R_test.size())
    throw input_error("prediction_error: length mismatch");
  double num = 0.0;
  long count = 0;
  for (int i = 0; i < y_test.size(); ++i) {
    if (R_test[i] == 1) {
      const double d = y_test[i] - y_pred[i];
      num += d * d;
      ++count;
    }
  }
  if (count == 0) throw input_error("prediction_error: no observed test samples");
  return num / static_cast<double>(count);
}

double l2_loss(const Eigen::VectorXd& beta_hat, const Eigen::VectorXd& beta_star) {
  if (beta_hat.size() != beta_star.size()) throw input_error("l2_loss: length mismatch");
  return (beta_hat - beta_star).norm();
}

SelectionMetrics selection_metrics(const std::vector<int>& selected,
                                   const std::vector<int>& true_support, int p) {
  std::set<int> sel(selected.begin(), selected.end());
  std::set<int> truth(true_support.begin(), true_support.end());
  for (int j : sel)
    if (j < 0 || j >= p) throw input_error("selection_metrics: selected index out of range");
  for (int j : truth)
    if (j < 0 || j >= p) throw input_error("selection_metrics: support index out of range");

  int tp = 0, fp = 0;
  for (int j : sel) (truth.count(j) ? tp : fp) += 1;
  const int fn = static_cast<int>(truth.size()) - tp;
  const int tn = p - tp - fp - fn;

  SelectionMetrics m;
  m.tp = tp;
  m.fp = fp;
  m.tn = tn;
  m.fn = fn;
  m.tpr = truth.empty() ? 1.0 : static_cast<double>(tp) / static_cast<double>(tp + fn);
  m.fpr = (fp + tn) == 0 ? 0.0 : static_cast<double>(fp) / static_cast<double>(fp + tn);
  // 0/0 conventions: nothing predicted and nothing true is perfect agreement.
  if (tp == 0 && fp == 0 && fn == 0)
    m.f1 = 1.0;
  else
    m.f1 = static_cast<double>(tp) / (tp + 0.5 * (fp + fn));
  return m;
}

double nrmse(const Eigen::VectorXd& y_true_missing, const Eigen::VectorXd& y_imputed) {
  const int m = static_cast<int>(y_true_missing.size());
  if (y_imputed.size() != m) throw input_error("nrmse: length mismatch");
  if (m < 2) throw input_error("nrmse: need at least 2 missing entries");
  const double mean = y_true_missing.mean();
  const double var = (y_true_missing.array() - mean).square().sum() / (m - 1.0);
  if (!(var > 0.0)) throw input_error("nrmse: true values have zero variance");
  const double mse = (y_true_missing - y_imputed).squaredNorm() / static_cast<double>(m);
  return std::sqrt(mse / var);
}

}  // namespace bsrmm
