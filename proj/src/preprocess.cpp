#include "bsrmm/preprocess.hpp"

#include <cmath>
#include <limits>
#include <set>
#include <sstream>

#include "bsrmm/csv.hpp"
#include "bsrmm/errors.hpp"
#include "bsrmm/simulation.hpp"

namespace bsrmm {

void validate_raw_table(const RawAbundanceTable& raw) {
  const int n = static_cast<int>(raw.sample_ids.size());
  const int p = static_cast<int>(raw.feature_ids.size());
  if (n == 0 || p == 0) throw input_error("abundance table: empty");
  if (raw.values.rows() != n || raw.values.cols() != p)
    throw input_error("abundance table: shape disagrees with ids");
  std::set<std::string> ids(raw.sample_ids.begin(), raw.sample_ids.end());
  if (ids.size() != raw.sample_ids.size())
    throw input_error("abundance table: duplicate sample ids");
  std::set<std::string> fids(raw.feature_ids.begin(), raw.feature_ids.end());
  if (fids.size() != raw.feature_ids.size())
    throw input_error("abundance table: duplicate feature ids");
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < p; ++j) {
      const double v = raw.values(i, j);
      if (std::isnan(v) || !std::isfinite(v)) {
        std::ostringstream msg;
        msg << "abundance table: non-finite value at sample '" << raw.sample_ids[i]
            << "', feature '" << raw.feature_ids[j] << "'";
        throw input_error(msg.str());
      }
      if (v < 0.0) {
        std::ostringstream msg;
        msg << "abundance table: negative value at sample '" << raw.sample_ids[i]
            << "', feature '" << raw.feature_ids[j] << "'";
        throw input_error(msg.str());
      }
    }
  }
}

PreprocessResult preprocess(const RawAbundanceTable& raw, const PreprocessConfig& cfg) {
  validate_raw_table(raw);
  validate_preprocess_config(cfg);
  const int n = static_cast<int>(raw.sample_ids.size());
  const int p = static_cast<int>(raw.feature_ids.size());

  Eigen::MatrixXd U = raw.values;
  PreprocessResult out;
  bool needs_norm = false;
  for (int i = 0; i < n; ++i) {
    const double s = U.row(i).sum();
    if (std::abs(s - 1.0) > 1e-6) needs_norm = true;
    if (!(s > 0.0)) {
      throw input_error("abundance table: sample '" + raw.sample_ids[i] + "' sums to zero");
    }
  }
  if (needs_norm) {
    for (int i = 0; i < n; ++i) U.row(i) /= U.row(i).sum();
    out.renormalized = true;
  }

  for (int j = 0; j < p; ++j) {
    int present = 0;
    for (int i = 0; i < n; ++i)
      if (U(i, j) > 0.0) ++present;
    const double prevalence = static_cast<double>(present) / n;
    const double mean_ab = U.col(j).mean();
    std::string reason;
    if (prevalence < cfg.prevalence_min) reason = "prevalence";
    if (mean_ab < cfg.mean_abundance_min)
      reason += reason.empty() ? "mean_abundance" : "+mean_abundance";
    if (!reason.empty())
      out.dropped.push_back({raw.feature_ids[j], reason});
    else {
      out.kept_indices.push_back(j);
      out.kept_features.push_back(raw.feature_ids[j]);
    }
  }
  if (out.kept_indices.empty())
    throw input_error("preprocess: no features survive the prevalence/abundance filters");

  const int pk = static_cast<int>(out.kept_indices.size());
  out.X.resize(n, pk);
  for (int k = 0; k < pk; ++k) {
    const int j = out.kept_indices[k];
    double min_pos = std::numeric_limits<double>::infinity();
    for (int i = 0; i < n; ++i)
      if (U(i, j) > 0.0) min_pos = std::min(min_pos, U(i, j));
    const double pseudo = cfg.pseudocount_factor * min_pos;
    for (int i = 0; i < n; ++i) {
      const double v = U(i, j) > 0.0 ? U(i, j) : pseudo;
      out.X(i, k) = std::log(v);
    }
  }

  if (cfg.standardize) standardize_columns(out.X);
  return out;
}

OutcomeData load_outcome(const std::string& path) {
  const CsvTable table = read_csv(path);
  if (table.header.size() != 2)
    throw input_error("outcome file must have exactly two columns (id, value): " + path);
  OutcomeData out;
  const int n = static_cast<int>(table.rows.size());
  if (n == 0) throw input_error("outcome file has no rows: " + path);
  out.y_obs.resize(n);
  out.R.resize(n);
  double min_obs = std::numeric_limits<double>::infinity();
  int n_obs = 0;
  for (int i = 0; i < n; ++i) {
    out.sample_ids.push_back(table.rows[i][0]);
    std::ostringstream ctx;
    ctx << path << " row " << i + 2;
    const double raw = parse_double(table.rows[i][1], ctx.str());
    if (std::isnan(raw) || raw == 0.0) {
      out.y_obs[i] = std::numeric_limits<double>::quiet_NaN();
      out.R[i] = 0;
      continue;
    }
    if (raw < 0.0)
      throw input_error("outcome file: negative value for sample '" + table.rows[i][0] + "'");
    out.y_obs[i] = std::log(raw);
    out.R[i] = 1;
    min_obs = std::min(min_obs, out.y_obs[i]);
    ++n_obs;
  }
  if (n_obs == 0) throw input_error("outcome file: every value is missing: " + path);
  out.xi = min_obs;
  return out;
}

}  // namespace bsrmm
