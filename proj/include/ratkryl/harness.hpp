#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "ratkryl/solvers.hpp"
#include "ratkryl/types.hpp"

namespace ratkryl {

// Flat dotted-key experiment configuration. Defaults reproduce the standard protocol:
// discrepancy stopping with tau = 1.01 for noisy data, best-iterate selection against
// the known solution for noise-free data.
struct ExperimentConfig {
  std::string problem_name = "phillips";
  int problem_size = 64;
  std::vector<std::string> methods;  // subset of {tikhonov, cgne, aggregate, lanczos_kr, rational_cg}
  std::string alphas_kind = "default";  // "default" or "geometric"
  double alphas_a = 0.1;
  double alphas_q = 2.0;
  int alphas_s = 0;
  std::vector<double> deltas = {0.0};
  std::vector<std::uint64_t> seeds = {1};
  double tau = 1.01;
  int n_max = kDefaultBudget;
  bool oracle_stopping = false;  // force best-iterate selection for noisy cells too
  int aggregate_count = 5;       // Tikhonov solves entering the aggregation method
  bool smooth_solution = false;
  std::string output_path = "runs.csv";
  std::string output_format = "csv";  // "csv" or "json"

  AlphaSchedule schedule() const;
};

// One experiment cell: the columns of the emitted tables.
struct RunRecord {
  std::string problem;
  int size = 0;
  std::string method;
  double delta = 0.0;
  std::uint64_t seed = 0;
  std::string stop_reason;
  int n_stop = 0;
  double error = 0.0;
  double residual = 0.0;
  double time_s = 0.0;
  std::string alpha_spec;
};

// Parses the flat `key = value` format ('#' starts a comment). Unknown keys and
// malformed values raise ConfigError naming the key path.
ExperimentConfig parse_config_text(const std::string& text);
ExperimentConfig parse_config_file(const std::string& path);

// Applies `key=value` overrides (same key paths as the file format).
void apply_override(ExperimentConfig& cfg, const std::string& key, const std::string& value);

// Raises ConfigError on an invalid combination (empty method list, missing seeds for
// noisy runs, unknown method or problem name, ...).
void validate(const ExperimentConfig& cfg);

// Runs every (method, delta, seed) cell. Noise-free cells select the best iterate
// against the known solution; noisy cells stop by discrepancy unless oracle stopping
// is forced. Deterministic apart from the recorded wall times. Solver breakdown
// becomes a record with the breakdown reason, never a crash.
std::vector<RunRecord> run_experiment(const ExperimentConfig& cfg);

// Least-squares slope of log(err) against log(delta). Degenerate inputs (all errors
// equal) report slope 0 with the warning flag set.
struct SlopeFit {
  double slope = 0.0;
  bool degenerate = false;
};
SlopeFit fit_loglog_slope(const std::vector<double>& deltas, const std::vector<double>& errors);

struct RatePoint {
  std::string method;
  std::string variant;  // "default" or "smooth"
  double delta = 0.0;
  double gmean_error = 0.0;
};

struct RateFit {
  std::string method;
  std::string variant;
  SlopeFit fit;
};

struct RateSweepResult {
  std::vector<RatePoint> points;
  std::vector<RateFit> fits;
};

// Error-versus-noise-level slopes per method, for the configured solution and its
// smooth variant. Needs >= 4 noise levels spanning >= 2 decades and >= 3 seeds;
// errors are geometric means across seeds at each level.
RateSweepResult rate_sweep(const ExperimentConfig& cfg);

// Serializes records with 17 significant digits. csv carries the fixed header
// problem,size,method,delta,seed,stop_reason,n_stop,error,residual,time_s,alpha_spec;
// json is an array of flat objects with the same keys.
std::string emit_csv(const std::vector<RunRecord>& records);
std::string emit_json(const std::vector<RunRecord>& records);
void emit_file(const std::vector<RunRecord>& records, const std::string& format,
               const std::string& path);

std::string rates_csv(const RateSweepResult& result);

}  // namespace ratkryl
