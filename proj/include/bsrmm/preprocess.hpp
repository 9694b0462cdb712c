#pragma once

#include <Eigen/Dense>
#include <string>
#include <vector>

#include "bsrmm/config.hpp"

namespace bsrmm {

struct RawAbundanceTable {
  std::vector<std::string> sample_ids;
  std::vector<std::string> feature_ids;
  Eigen::MatrixXd values;  // n x p, counts or relative abundances
};

void validate_raw_table(const RawAbundanceTable& raw);

struct PreprocessResult {
  Eigen::MatrixXd X;  // n x p_kept, log scale, standardized per config
  std::vector<std::string> kept_features;
  std::vector<int> kept_indices;  // into the original feature order
  struct DroppedFeature {
    std::string id;
    std::string reason;
  };
  std::vector<DroppedFeature> dropped;
  bool renormalized = false;
};

// The real-data pipeline: renormalize rows to relative abundances when
// needed, apply prevalence and mean-abundance filters, replace zeros by
// pseudocount_factor times the feature's minimum positive value, log
// transform, then center and scale columns.
PreprocessResult preprocess(const RawAbundanceTable& raw, const PreprocessConfig& cfg);

struct OutcomeData {
  std::vector<std::string> sample_ids;
  Eigen::VectorXd y_obs;  // log scale; NaN where missing
  Eigen::VectorXi R;
  double xi = 0.0;  // log of the smallest observed value
};

// Outcome ingestion: zeros and blanks are missing, observed values are
// log-transformed, xi is the log of the smallest observed value.
OutcomeData load_outcome(const std::string& path);

}  // namespace bsrmm
