#pragma once

#include <Eigen/Dense>
#include <vector>

namespace bsrmm {

struct EvaluationReport {
  double pe = 0.0;
  double l2_loss = 0.0;
  double tpr = 0.0;
  double fpr = 0.0;
  double f1 = 0.0;
  double nrmse = 0.0;
  int n_selected = 0;
  double ci_coverage_missing = 0.0;
};

// Mean squared prediction error over observed test samples.
double prediction_error(const Eigen::VectorXd& y_test, const Eigen::VectorXd& y_pred,
                        const Eigen::VectorXi& R_test);

double l2_loss(const Eigen::VectorXd& beta_hat, const Eigen::VectorXd& beta_star);

struct SelectionMetrics {
  double tpr, fpr, f1;
  int tp, fp, tn, fn;
};

SelectionMetrics selection_metrics(const std::vector<int>& selected,
                                   const std::vector<int>& true_support, int p);

// sqrt(mean squared imputation error / sample variance of the true values).
double nrmse(const Eigen::VectorXd& y_true_missing, const Eigen::VectorXd& y_imputed);

}  // namespace bsrmm
