#include "bsrmm/config.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

#include "bsrmm/errors.hpp"

namespace bsrmm {

namespace {

std::string trim(const std::string& s) {
  size_t a = s.find_first_not_of(" \t");
  size_t b = s.find_last_not_of(" \t");
  if (a == std::string::npos) return "";
  return s.substr(a, b - a + 1);
}

double to_double(const std::string& key, const std::string& value) {
  char* end = nullptr;
  const double v = std::strtod(value.c_str(), &end);
  if (end == value.c_str() || *end != '\0')
    throw input_error("config: key '" + key + "' expects a number, got '" + value + "'");
  return v;
}

long to_long(const std::string& key, const std::string& value) {
  char* end = nullptr;
  const long v = std::strtol(value.c_str(), &end, 10);
  if (end == value.c_str() || *end != '\0')
    throw input_error("config: key '" + key + "' expects an integer, got '" + value + "'");
  return v;
}

std::uint64_t to_u64(const std::string& key, const std::string& value) {
  char* end = nullptr;
  const unsigned long long v = std::strtoull(value.c_str(), &end, 10);
  if (end == value.c_str() || *end != '\0')
    throw input_error("config: key '" + key + "' expects an unsigned integer, got '" + value +
                      "'");
  return v;
}

bool to_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1") return true;
  if (value == "false" || value == "0") return false;
  throw input_error("config: key '" + key + "' expects true/false, got '" + value + "'");
}

// Applies one run-config key; returns false when the key is not recognized.
bool apply_run_key(RunConfig& cfg, const std::string& key, const std::string& value) {
  if (key == "nu") cfg.hp.nu = to_double(key, value);
  else if (key == "omega") cfg.hp.omega = to_double(key, value);
  else if (key == "tau2") cfg.hp.tau2 = to_double(key, value);
  else if (key == "c") cfg.hp.c = to_double(key, value);
  else if (key == "ising_a") cfg.hp.ising_a_scalar = to_double(key, value);
  else if (key == "lod_scale") cfg.hp.lod_scale = to_double(key, value);
  else if (key == "ising_double_count") cfg.hp.ising_double_count = to_bool(key, value);
  else if (key == "n_iterations") cfg.sampler.n_iterations = static_cast<int>(to_long(key, value));
  else if (key == "burn_in") cfg.sampler.burn_in = static_cast<int>(to_long(key, value));
  else if (key == "gamma_updates_per_sweep")
    cfg.sampler.gamma_updates_per_sweep = static_cast<int>(to_long(key, value));
  else if (key == "seed") cfg.sampler.seed = to_u64(key, value);
  else if (key == "thin") cfg.sampler.thin = static_cast<int>(to_long(key, value));
  else if (key == "impute_mode") cfg.sampler.impute_mode = parse_impute_mode(value);
  else if (key == "store_traces") cfg.sampler.store_traces = to_bool(key, value);
  else if (key == "preprocess") cfg.apply_preprocess = to_bool(key, value);
  else if (key == "prevalence_min") cfg.preprocess.prevalence_min = to_double(key, value);
  else if (key == "mean_abundance_min") cfg.preprocess.mean_abundance_min = to_double(key, value);
  else if (key == "pseudocount_factor") cfg.preprocess.pseudocount_factor = to_double(key, value);
  else if (key == "standardize") cfg.preprocess.standardize = to_bool(key, value);
  else return false;
  return true;
}

bool apply_scenario_key(BenchmarkScenario& sc, const std::string& key, const std::string& value) {
  ScenarioSpec& s = sc.spec;
  if (key == "n") s.n = static_cast<int>(to_long(key, value));
  else if (key == "p") s.p = static_cast<int>(to_long(key, value));
  else if (key == "design") s.design = parse_design(value);
  else if (key == "snr") s.snr = to_double(key, value);
  else if (key == "missing_rate") s.missing_rate = to_double(key, value);
  else if (key == "mnar_fraction") s.mnar_fraction = to_double(key, value);
  else if (key == "train_fraction") s.train_fraction = to_double(key, value);
  else if (key == "beta0_true") s.beta0_true = to_double(key, value);
  else if (key == "heavy_tail_errors") s.heavy_tail_errors = to_bool(key, value);
  else if (key == "exp2_numerator") s.exp2_numerator = to_bool(key, value);
  else if (key == "stochastic_mnar") s.stochastic_mnar = to_bool(key, value);
  else if (key == "mnar_decay_scale") s.mnar_decay_scale = to_double(key, value);
  else if (key == "lod_jitter_sd") s.lod_jitter_sd = to_double(key, value);
  else if (key == "impute_modes") {
    sc.impute_modes.clear();
    std::stringstream ss(value);
    std::string part;
    while (std::getline(ss, part, ',')) {
      part = trim(part);
      if (!part.empty()) sc.impute_modes.push_back(parse_impute_mode(part));
    }
    if (sc.impute_modes.empty()) throw input_error("config: impute_modes is empty");
  } else {
    return false;
  }
  return true;
}

}  // namespace

void validate_preprocess_config(const PreprocessConfig& cfg) {
  if (!(cfg.prevalence_min > 0.0) || cfg.prevalence_min >= 1.0)
    throw input_error("preprocess: prevalence_min must be in (0,1)");
  if (!(cfg.mean_abundance_min > 0.0) || cfg.mean_abundance_min >= 1.0)
    throw input_error("preprocess: mean_abundance_min must be in (0,1)");
  if (!(cfg.pseudocount_factor > 0.0))
    throw input_error("preprocess: pseudocount_factor must be positive");
}

std::map<std::string, std::string> read_key_value_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw input_error("cannot open config file: " + path);
  std::map<std::string, std::string> kv;
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const size_t hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const size_t eq = line.find('=');
    if (eq == std::string::npos) {
      std::ostringstream msg;
      msg << path << ":" << line_no << ": expected 'key = value'";
      throw input_error(msg.str());
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) throw input_error(path + ": empty key");
    if (kv.count(key)) throw input_error(path + ": duplicate key '" + key + "'");
    kv[key] = value;
  }
  return kv;
}

RunConfig parse_run_config(const std::string& path) {
  RunConfig cfg;
  for (const auto& [key, value] : read_key_value_file(path)) {
    if (!apply_run_key(cfg, key, value))
      throw input_error("config: unknown key '" + key + "' in " + path);
  }
  validate_sampler_config(cfg.sampler);
  validate_preprocess_config(cfg.preprocess);
  return cfg;
}

BenchmarkScenario parse_scenario(const std::string& path) {
  BenchmarkScenario sc;
  std::uint64_t seed = 0;
  bool seed_seen = false;
  for (const auto& [key, value] : read_key_value_file(path)) {
    if (key == "seed") {
      seed = to_u64(key, value);
      seed_seen = true;
      continue;
    }
    if (apply_scenario_key(sc, key, value)) continue;
    if (apply_run_key(sc.run, key, value)) continue;
    throw input_error("scenario: unknown key '" + key + "' in " + path);
  }
  if (seed_seen) {
    sc.spec.seed = seed;
    sc.run.sampler.seed = seed;
  }
  validate_scenario(sc.spec);
  validate_sampler_config(sc.run.sampler);
  return sc;
}

}  // namespace bsrmm
