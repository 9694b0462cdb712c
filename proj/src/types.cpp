#include "bsrmm/types.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "bsrmm/errors.hpp"

namespace bsrmm {

void validate_dataset(const Dataset& ds, bool standardized) {
  if (ds.n <= 0 || ds.p <= 0) throw input_error("dataset: n and p must be positive");
  if (ds.X.rows() != ds.n || ds.X.cols() != ds.p)
    throw input_error("dataset: X dimensions disagree with n, p");
  if (ds.y_obs.size() != ds.n || ds.R.size() != ds.n)
    throw input_error("dataset: y_obs and R must have length n");
  if (!ds.X.allFinite()) throw input_error("dataset: X contains non-finite values");
  if (!std::isfinite(ds.xi)) throw input_error("dataset: xi is not finite");

  int n_obs = 0;
  for (int i = 0; i < ds.n; ++i) {
    if (ds.R[i] != 0 && ds.R[i] != 1) throw input_error("dataset: R must be 0/1");
    if (ds.R[i] == 1) {
      ++n_obs;
      if (!std::isfinite(ds.y_obs[i])) {
        std::ostringstream msg;
        msg << "dataset: observed outcome at sample " << i << " is not finite";
        throw input_error(msg.str());
      }
    }
  }
  if (n_obs == 0) throw input_error("dataset: no observed outcome values");

  if (standardized) {
    for (int j = 0; j < ds.p; ++j) {
      const double mean = ds.X.col(j).mean();
      const double sd = std::sqrt((ds.X.col(j).array() - mean).square().sum() / (ds.n - 1));
      if (std::abs(mean) > 1e-8 || std::abs(sd - 1.0) > 1e-6) {
        std::ostringstream msg;
        msg << "dataset: column " << j << " not standardized (mean " << mean << ", sd " << sd
            << ")";
        throw input_error(msg.str());
      }
    }
  }
}

void Hyperparameters::bind(int p) {
  if (ising_a.size() == 0) ising_a = Eigen::VectorXd::Constant(p, ising_a_scalar);
  validate_hyperparameters(*this, p);
}

void validate_hyperparameters(const Hyperparameters& hp, int p) {
  if (!(hp.nu > 0.0) || !(hp.omega > 0.0)) throw input_error("hyperparameters: nu, omega must be positive");
  if (!(hp.tau2 > 0.0)) throw input_error("hyperparameters: tau2 must be positive");
  if (!(hp.c > 0.0)) throw input_error("hyperparameters: c must be positive");
  if (!(hp.lod_scale > 0.0)) throw input_error("hyperparameters: lod_scale must be positive");
  if (hp.ising_a.size() != p) throw input_error("hyperparameters: ising_a length must equal p");
  if (hp.ising_Q.size() != 0) {
    if (hp.ising_Q.rows() != p || hp.ising_Q.cols() != p)
      throw input_error("hyperparameters: Q must be p x p");
    const double asym = (hp.ising_Q - hp.ising_Q.transpose()).cwiseAbs().maxCoeff();
    if (asym > 1e-9) {
      std::ostringstream msg;
      msg << "hyperparameters: Q asymmetric by " << asym;
      throw input_error(msg.str());
    }
  }
}

SelectionState SelectionState::empty(int p) {
  SelectionState s;
  s.gamma = Eigen::VectorXi::Zero(p);
  s.p_gamma = 0;
  return s;
}

SelectionState SelectionState::from_active(int p, std::vector<int> active_idx) {
  std::sort(active_idx.begin(), active_idx.end());
  SelectionState s;
  s.gamma = Eigen::VectorXi::Zero(p);
  for (int j : active_idx) {
    if (j < 0 || j >= p) throw input_error("selection: active index out of range");
    if (s.gamma[j]) throw input_error("selection: duplicate active index");
    s.gamma[j] = 1;
  }
  s.active = std::move(active_idx);
  s.p_gamma = static_cast<int>(s.active.size());
  return s;
}

}  // namespace bsrmm
