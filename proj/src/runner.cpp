#include "bsrmm/runner.hpp"

#include <json.hpp>

#include <atomic>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <map>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include "bsrmm/csv.hpp"
#include "bsrmm/errors.hpp"
#include "bsrmm/preprocess.hpp"
#include "bsrmm/rng.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace bsrmm {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string padded_id(const char* prefix, int i, int width) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%s%0*d", prefix, width, i + 1);
  return buf;
}

std::vector<std::string> make_ids(const char* prefix, int count) {
  const int width = count >= 1000 ? 4 : 3;
  std::vector<std::string> ids;
  ids.reserve(count);
  for (int i = 0; i < count; ++i) ids.push_back(padded_id(prefix, i, width));
  return ids;
}

// Marker dropped into an output directory while a command runs; removed on
// success so interrupted runs are recognizable.
class IncompleteMarker {
 public:
  explicit IncompleteMarker(const fs::path& dir) : path_(dir / "_INCOMPLETE") {
    std::ofstream out(path_);
    out << "run in progress or aborted\n";
  }
  ~IncompleteMarker() {
    if (!done_) return;
    std::error_code ec;
    fs::remove(path_, ec);
  }
  void complete() { done_ = true; }

 private:
  fs::path path_;
  bool done_ = false;
};

void ensure_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw input_error("cannot create output directory: " + dir);
}

json metric_stats(const std::vector<double>& values) {
  std::vector<double> clean;
  for (double v : values)
    if (!std::isnan(v)) clean.push_back(v);
  json out;
  out["n"] = clean.size();
  if (clean.empty()) {
    out["mean"] = nullptr;
    out["sd"] = nullptr;
    out["formatted"] = "-";
    return out;
  }
  double mean = 0.0;
  for (double v : clean) mean += v;
  mean /= static_cast<double>(clean.size());
  double sd = 0.0;
  if (clean.size() > 1) {
    for (double v : clean) sd += (v - mean) * (v - mean);
    sd = std::sqrt(sd / (static_cast<double>(clean.size()) - 1.0));
  }
  out["mean"] = mean;
  out["sd"] = sd;
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.2f(%.2f)", mean, sd);
  out["formatted"] = buf;
  return out;
}

const std::vector<std::string> kMetricColumns = {"pe",    "l2_loss", "tpr",        "fpr",
                                                 "f1",    "nrmse",   "n_selected", "ci_coverage"};

double report_field(const EvaluationReport& r, const std::string& name) {
  if (name == "pe") return r.pe;
  if (name == "l2_loss") return r.l2_loss;
  if (name == "tpr") return r.tpr;
  if (name == "fpr") return r.fpr;
  if (name == "f1") return r.f1;
  if (name == "nrmse") return r.nrmse;
  if (name == "n_selected") return r.n_selected;
  if (name == "ci_coverage") return r.ci_coverage_missing;
  throw input_error("unknown metric column: " + name);
}

void write_aggregate(const std::string& dir, const std::vector<BenchmarkRow>& rows) {
  std::map<std::string, std::map<std::string, std::vector<double>>> by_mode;
  std::set<int> replicates;
  for (const auto& row : rows) {
    replicates.insert(row.replicate);
    for (const auto& col : kMetricColumns)
      by_mode[row.mode][col].push_back(report_field(row.report, col));
  }
  json agg;
  agg["replicates"] = replicates.size();
  json modes;
  for (const auto& [mode, metrics] : by_mode) {
    json entry;
    for (const auto& [name, values] : metrics) entry[name] = metric_stats(values);
    modes[mode] = entry;
  }
  agg["modes"] = modes;
  std::ofstream out(fs::path(dir) / "aggregate.json");
  if (!out) throw input_error("cannot write aggregate.json in " + dir);
  out << agg.dump(2) << '\n';
}

void write_metrics_csv(const std::string& dir, const std::vector<BenchmarkRow>& rows) {
  CsvTable table;
  table.header = {"replicate", "mode"};
  for (const auto& col : kMetricColumns) table.header.push_back(col);
  for (const auto& row : rows) {
    std::vector<std::string> cells = {std::to_string(row.replicate), row.mode};
    for (const auto& col : kMetricColumns) cells.push_back(format_double(report_field(row.report, col)));
    table.rows.push_back(std::move(cells));
  }
  write_csv((fs::path(dir) / "metrics.csv").string(), table);
}

}  // namespace

std::uint64_t replicate_data_seed(std::uint64_t master, int replicate) {
  return derive_seed(master, 2ULL * static_cast<std::uint64_t>(replicate));
}

std::uint64_t replicate_chain_seed(std::uint64_t master, int replicate) {
  return derive_seed(master, 2ULL * static_cast<std::uint64_t>(replicate) + 1ULL);
}

int default_thread_count() {
  if (const char* env = std::getenv("BSRMM_THREADS")) {
    const int v = std::atoi(env);
    if (v > 0) return v;
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

void run_simulate(const std::string& scenario_path, const std::string& out_dir) {
  const BenchmarkScenario sc = parse_scenario(scenario_path);
  ensure_dir(out_dir);
  IncompleteMarker marker(out_dir);

  const ReplicateData rep = make_replicate(sc.spec);
  const int n = sc.spec.n, p = sc.spec.p;
  const auto sample_ids = make_ids("s", n);
  const auto feature_ids = make_ids("f", p);
  const fs::path dir(out_dir);

  write_matrix_csv((dir / "X.csv").string(), "sample_id", sample_ids, feature_ids, rep.X_raw);

  // Outcome on the raw scale so simulated and real data share one ingestion
  // path: zeros mark missing entries.
  {
    CsvTable y;
    y.header = {"sample_id", "value"};
    for (int i = 0; i < n; ++i) {
      const double v = rep.truth.R[i] == 1 ? std::exp(rep.truth.y_true[i]) : 0.0;
      y.rows.push_back({sample_ids[i], format_double(v)});
    }
    write_csv((dir / "y.csv").string(), y);
  }

  {
    CsvTable truth;
    truth.header = {"quantity", "id", "value"};
    for (int i = 0; i < n; ++i)
      truth.rows.push_back({"y_true", sample_ids[i], format_double(rep.truth.y_true[i])});
    for (int j = 0; j < p; ++j)
      truth.rows.push_back({"beta_true", feature_ids[j], format_double(rep.truth.beta_true[j])});
    truth.rows.push_back({"beta0_true", "", format_double(rep.truth.beta0_true)});
    truth.rows.push_back({"sigma_true", "", format_double(rep.truth.sigma_true)});
    truth.rows.push_back({"xi", "", format_double(rep.truth.xi)});
    write_csv((dir / "truth.csv").string(), truth);
  }

  {
    CsvTable masks;
    masks.header = {"sample_id", "observed", "missing", "mnar", "train"};
    std::set<int> train(rep.truth.train_idx.begin(), rep.truth.train_idx.end());
    for (int i = 0; i < n; ++i) {
      masks.rows.push_back({sample_ids[i], std::to_string(rep.truth.R[i]),
                            std::to_string(rep.truth.missing_mask[i]),
                            std::to_string(rep.truth.mnar_mask[i]),
                            std::to_string(train.count(i) ? 1 : 0)});
    }
    write_csv((dir / "masks.csv").string(), masks);
  }

  {
    const Eigen::MatrixXd Q =
        rep.Q.size() != 0 ? rep.Q : Eigen::MatrixXd::Zero(p, p);
    write_matrix_csv((dir / "Q.csv").string(), "feature_id", feature_ids, feature_ids, Q);
  }

  marker.complete();
}

namespace {

struct LoadedDesign {
  Dataset dataset;
  std::vector<std::string> filter_report;  // lines "feature,reason"
};

LoadedDesign load_design(const FitPaths& paths, const RunConfig& cfg) {
  LoadedDesign out;
  const LabeledMatrix xm = read_matrix_csv(paths.x_path);
  const int n = static_cast<int>(xm.values.rows());
  if (n < 2) throw input_error("design matrix needs at least 2 samples: " + paths.x_path);

  if (cfg.apply_preprocess) {
    RawAbundanceTable raw;
    raw.sample_ids = xm.row_ids;
    raw.feature_ids = xm.col_ids;
    raw.values = xm.values;
    PreprocessResult pp = preprocess(raw, cfg.preprocess);
    out.dataset.X = std::move(pp.X);
    out.dataset.feature_ids = pp.kept_features;
    for (const auto& d : pp.dropped) out.filter_report.push_back(d.id + "," + d.reason);
  } else {
    out.dataset.X = xm.values;
    out.dataset.feature_ids = xm.col_ids;
    if (!out.dataset.X.allFinite())
      throw input_error("design matrix contains non-finite values: " + paths.x_path);
    if (cfg.preprocess.standardize) standardize_columns(out.dataset.X);
  }
  out.dataset.sample_ids = xm.row_ids;
  out.dataset.n = static_cast<int>(out.dataset.X.rows());
  out.dataset.p = static_cast<int>(out.dataset.X.cols());
  return out;
}

void align_outcome(Dataset& ds, const OutcomeData& outcome) {
  if (outcome.sample_ids.size() != ds.sample_ids.size())
    throw input_error("outcome and design matrix have different sample counts");
  std::map<std::string, int> pos;
  for (size_t i = 0; i < outcome.sample_ids.size(); ++i)
    pos[outcome.sample_ids[i]] = static_cast<int>(i);
  ds.y_obs.resize(ds.n);
  ds.R.resize(ds.n);
  for (int i = 0; i < ds.n; ++i) {
    auto it = pos.find(ds.sample_ids[i]);
    if (it == pos.end())
      throw input_error("outcome file is missing sample id '" + ds.sample_ids[i] + "'");
    ds.y_obs[i] = outcome.y_obs[it->second];
    ds.R[i] = outcome.R[it->second];
  }
  double min_obs = std::numeric_limits<double>::infinity();
  int n_obs = 0;
  for (int i = 0; i < ds.n; ++i) {
    if (ds.R[i] == 1) {
      min_obs = std::min(min_obs, ds.y_obs[i]);
      ++n_obs;
    }
  }
  if (n_obs == 0) throw input_error("outcome has no observed values after alignment");
  ds.xi = min_obs;
}

Eigen::MatrixXd load_q_matrix(const std::string& path,
                              const std::vector<std::string>& feature_ids) {
  const LabeledMatrix qm = read_matrix_csv(path);
  std::map<std::string, int> pos;
  for (size_t j = 0; j < qm.col_ids.size(); ++j) pos[qm.col_ids[j]] = static_cast<int>(j);
  if (qm.row_ids != qm.col_ids)
    throw input_error("Q matrix row and column ids disagree: " + path);

  const int p = static_cast<int>(feature_ids.size());
  std::vector<int> map(p);
  for (int j = 0; j < p; ++j) {
    auto it = pos.find(feature_ids[j]);
    if (it == pos.end())
      throw input_error("Q matrix lacks feature id '" + feature_ids[j] + "'");
    map[j] = it->second;
  }
  Eigen::MatrixXd Q(p, p);
  for (int a = 0; a < p; ++a)
    for (int b = 0; b < p; ++b) Q(a, b) = qm.values(map[a], map[b]);

  const double asym = (Q - Q.transpose()).cwiseAbs().maxCoeff();
  if (asym > 1e-9) {
    std::ostringstream msg;
    msg << "Q matrix asymmetric by " << asym << ": " << path;
    throw input_error(msg.str());
  }
  if (Q.diagonal().cwiseAbs().maxCoeff() > 0.0) {
    std::cerr << "warning: Q diagonal entries are ignored and have been zeroed\n";
    Q.diagonal().setZero();
  }
  return Q;
}

void write_fit_outputs(const std::string& out_dir, const Dataset& ds, const RunConfig& cfg,
                       const ChainSummary& sum, const std::vector<std::string>& filter_report) {
  const fs::path dir(out_dir);

  {
    CsvTable ppi;
    ppi.header = {"feature_id", "ppi"};
    for (int j = 0; j < ds.p; ++j)
      ppi.rows.push_back({ds.feature_ids[j], format_double(sum.ppi[j])});
    write_csv((dir / "ppi.csv").string(), ppi);
  }
  {
    CsvTable coef;
    coef.header = {"feature_id", "ppi", "mean", "q025", "q975"};
    for (int j = 0; j < ds.p; ++j) {
      coef.rows.push_back({ds.feature_ids[j], format_double(sum.ppi[j]),
                           format_double(sum.beta_mean[j]), format_double(sum.beta_ci_lower[j]),
                           format_double(sum.beta_ci_upper[j])});
    }
    write_csv((dir / "coefficients.csv").string(), coef);
  }
  {
    CsvTable imputed;
    imputed.header = {"sample_id", "mean", "q025", "q975"};
    for (size_t m = 0; m < sum.missing_indices.size(); ++m) {
      const int i = sum.missing_indices[m];
      imputed.rows.push_back({ds.sample_ids[i], format_double(sum.y_imputed_mean[m]),
                              format_double(sum.y_imputed_ci_lower[m]),
                              format_double(sum.y_imputed_ci_upper[m])});
    }
    write_csv((dir / "imputed.csv").string(), imputed);
  }
  if (!filter_report.empty()) {
    CsvTable rep;
    rep.header = {"feature_id", "reason"};
    for (const auto& line : filter_report) {
      const size_t comma = line.find(',');
      rep.rows.push_back({line.substr(0, comma), line.substr(comma + 1)});
    }
    write_csv((dir / "filter_report.csv").string(), rep);
  }

  json summary;
  summary["n"] = ds.n;
  summary["p"] = ds.p;
  summary["n_missing"] = sum.missing_indices.size();
  summary["xi"] = ds.xi;
  summary["xi_effective"] = cfg.hp.lod_scale * ds.xi;
  summary["impute_mode"] = impute_mode_name(cfg.sampler.impute_mode);
  summary["seed"] = cfg.sampler.seed;
  summary["n_iterations"] = cfg.sampler.n_iterations;
  summary["burn_in"] = cfg.sampler.burn_in;
  summary["thin"] = cfg.sampler.thin;
  summary["n_draws"] = sum.n_draws;
  summary["beta0_mean"] = sum.beta0_mean;
  summary["sigma2_mean"] = sum.sigma2_mean;
  summary["theta_mean"] = sum.theta_mean;
  summary["n_selected"] = sum.selected.size();
  json sel = json::array();
  for (int j : sum.selected) sel.push_back(ds.feature_ids[j]);
  summary["selected"] = sel;
  summary["gamma_updates"] = sum.gamma_updates;
  summary["gamma_flips"] = sum.gamma_flips;
  std::ofstream out(dir / "summary.json");
  if (!out) throw input_error("cannot write summary.json in " + out_dir);
  out << summary.dump(2) << '\n';

  if (cfg.sampler.store_traces) {
    CsvTable traces;
    traces.header = {"sweep", "p_gamma", "beta0", "sigma2", "theta", "log_post"};
    for (size_t t = 0; t < sum.trace_beta0.size(); ++t) {
      traces.rows.push_back({std::to_string(t), std::to_string(sum.trace_p_gamma[t]),
                             format_double(sum.trace_beta0[t]), format_double(sum.trace_sigma2[t]),
                             format_double(sum.trace_theta[t]),
                             format_double(sum.trace_log_post[t])});
    }
    write_csv((dir / "traces.csv").string(), traces);

    CsvTable betas;
    betas.header = {"sweep", "feature_id", "value"};
    for (size_t t = 0; t < sum.trace_beta.size(); ++t) {
      for (const auto& [j, v] : sum.trace_beta[t])
        betas.rows.push_back({std::to_string(t), ds.feature_ids[j], format_double(v)});
    }
    write_csv((dir / "beta_traces.csv").string(), betas);
  }
}

}  // namespace

void run_fit(const FitPaths& paths) {
  const RunConfig cfg = parse_run_config(paths.config_path);
  ensure_dir(paths.out_dir);
  IncompleteMarker marker(paths.out_dir);

  LoadedDesign design = load_design(paths, cfg);
  Dataset& ds = design.dataset;
  const OutcomeData outcome = load_outcome(paths.y_path);
  align_outcome(ds, outcome);
  validate_dataset(ds, cfg.preprocess.standardize);

  RunConfig bound = cfg;
  if (!paths.q_path.empty()) bound.hp.ising_Q = load_q_matrix(paths.q_path, ds.feature_ids);
  bound.hp.bind(ds.p);

  const ChainSummary sum = run_chain(ds, bound.hp, bound.sampler);
  write_fit_outputs(paths.out_dir, ds, bound, sum, design.filter_report);
  marker.complete();
}

ChainSummary fit_replicate(const ReplicateData& rep, const RunConfig& run, ImputeMode mode,
                           std::uint64_t chain_seed) {
  RunConfig cfg = run;
  cfg.sampler.impute_mode = mode;
  cfg.sampler.seed = chain_seed;
  cfg.hp.ising_Q = rep.Q;
  cfg.hp.ising_a.resize(0);
  cfg.hp.bind(rep.train.p);
  return run_chain(rep.train, cfg.hp, cfg.sampler);
}

EvaluationReport evaluate_replicate(const ReplicateData& rep, const ChainSummary& summary) {
  EvaluationReport out;
  const Eigen::VectorXd beta_avg = summary.beta_model_averaged();
  out.l2_loss = l2_loss(beta_avg, rep.truth.beta_true);

  const SelectionMetrics sel =
      selection_metrics(summary.selected, rep.truth.support, rep.train.p);
  out.tpr = sel.tpr;
  out.fpr = sel.fpr;
  out.f1 = sel.f1;
  out.n_selected = static_cast<int>(summary.selected.size());

  out.pe = kNaN;
  if (rep.R_test.size() > 0 && rep.R_test.sum() > 0) {
    Eigen::VectorXd y_pred = rep.X_test * beta_avg;
    y_pred.array() += summary.beta0_mean;
    out.pe = prediction_error(rep.y_test, y_pred, rep.R_test);
  }

  const int n_missing = static_cast<int>(summary.missing_indices.size());
  out.nrmse = kNaN;
  out.ci_coverage_missing = kNaN;
  if (n_missing >= 2) {
    Eigen::VectorXd y_true_missing(n_missing);
    for (int m = 0; m < n_missing; ++m)
      y_true_missing[m] = rep.truth.y_true[rep.truth.train_idx[summary.missing_indices[m]]];
    out.nrmse = nrmse(y_true_missing, summary.y_imputed_mean);
    int covered = 0;
    for (int m = 0; m < n_missing; ++m) {
      if (summary.y_imputed_ci_lower[m] <= y_true_missing[m] &&
          y_true_missing[m] <= summary.y_imputed_ci_upper[m])
        ++covered;
    }
    out.ci_coverage_missing = static_cast<double>(covered) / n_missing;
  }
  return out;
}

std::vector<BenchmarkRow> benchmark_scenario(const BenchmarkScenario& sc, int replicates,
                                             int threads) {
  if (replicates <= 0) throw input_error("benchmark: replicates must be positive");
  const int n_modes = static_cast<int>(sc.impute_modes.size());
  std::vector<BenchmarkRow> rows(static_cast<size_t>(replicates) * n_modes);
  std::atomic<int> next{0};
  std::atomic<bool> failed{false};
  std::string first_error;
  std::mutex err_mutex;

  auto worker = [&]() {
    for (;;) {
      const int k = next.fetch_add(1);
      if (k >= replicates || failed.load()) return;
      try {
        ScenarioSpec spec = sc.spec;
        spec.seed = replicate_data_seed(sc.spec.seed, k);
        const ReplicateData rep = make_replicate(spec);
        const std::uint64_t chain_seed = replicate_chain_seed(sc.spec.seed, k);
        for (int m = 0; m < n_modes; ++m) {
          const ChainSummary sum = fit_replicate(rep, sc.run, sc.impute_modes[m], chain_seed);
          BenchmarkRow& row = rows[static_cast<size_t>(k) * n_modes + m];
          row.replicate = k;
          row.mode = impute_mode_name(sc.impute_modes[m]);
          row.report = evaluate_replicate(rep, sum);
        }
      } catch (const std::exception& e) {
        std::lock_guard<std::mutex> lock(err_mutex);
        if (!failed.exchange(true)) first_error = e.what();
        return;
      }
    }
  };

  const int n_workers = std::max(1, std::min(threads, replicates));
  std::vector<std::thread> pool;
  for (int t = 0; t < n_workers; ++t) pool.emplace_back(worker);
  for (auto& th : pool) th.join();
  if (failed.load()) throw numerical_error("benchmark replicate failed: " + first_error);
  return rows;
}

void run_benchmark(const std::string& scenario_path, int replicates, const std::string& out_dir,
                   int threads) {
  const BenchmarkScenario sc = parse_scenario(scenario_path);
  ensure_dir(out_dir);
  IncompleteMarker marker(out_dir);
  const std::vector<BenchmarkRow> rows = benchmark_scenario(sc, replicates, threads);
  write_metrics_csv(out_dir, rows);
  write_aggregate(out_dir, rows);
  marker.complete();
}

void run_summarize(const std::string& dir) {
  const CsvTable table = read_csv((fs::path(dir) / "metrics.csv").string());
  if (table.header.size() < 2 || table.header[0] != "replicate" || table.header[1] != "mode")
    throw input_error("metrics.csv has an unexpected header in " + dir);
  std::vector<BenchmarkRow> rows;
  for (size_t r = 0; r < table.rows.size(); ++r) {
    BenchmarkRow row;
    row.replicate = static_cast<int>(std::strtol(table.rows[r][0].c_str(), nullptr, 10));
    row.mode = table.rows[r][1];
    for (size_t c = 2; c < table.header.size(); ++c) {
      std::ostringstream ctx;
      ctx << "metrics.csv row " << r + 2;
      const double v = parse_double(table.rows[r][c], ctx.str());
      const std::string& name = table.header[c];
      if (name == "pe") row.report.pe = v;
      else if (name == "l2_loss") row.report.l2_loss = v;
      else if (name == "tpr") row.report.tpr = v;
      else if (name == "fpr") row.report.fpr = v;
      else if (name == "f1") row.report.f1 = v;
      else if (name == "nrmse") row.report.nrmse = v;
      else if (name == "n_selected") row.report.n_selected = static_cast<int>(v);
      else if (name == "ci_coverage") row.report.ci_coverage_missing = v;
      else throw input_error("metrics.csv has unknown column '" + name + "'");
    }
    rows.push_back(std::move(row));
  }
  write_aggregate(dir, rows);
}

}  // namespace bsrmm
