#include "ratkryl/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <tuple>

#include "ratkryl/linops.hpp"
#include "ratkryl/oracle.hpp"
#include "ratkryl/problems.hpp"
#include "ratkryl/stopping.hpp"

namespace ratkryl {

namespace {

const std::vector<std::string> kMethods = {"tikhonov", "cgne", "aggregate", "lanczos_kr",
                                           "rational_cg"};

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const std::string t = trim(item);
    if (!t.empty()) out.push_back(t);
  }
  return out;
}

double parse_double(const std::string& key, const std::string& v) {
  try {
    std::size_t pos = 0;
    const double d = std::stod(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return d;
  } catch (const std::exception&) {
    throw ConfigError(key + ": expected a number, got '" + v + "'");
  }
}

int parse_int(const std::string& key, const std::string& v) {
  try {
    std::size_t pos = 0;
    const int i = std::stoi(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return i;
  } catch (const std::exception&) {
    throw ConfigError(key + ": expected an integer, got '" + v + "'");
  }
}

std::uint64_t parse_seed(const std::string& key, const std::string& v) {
  try {
    std::size_t pos = 0;
    const unsigned long long u = std::stoull(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return static_cast<std::uint64_t>(u);
  } catch (const std::exception&) {
    throw ConfigError(key + ": expected a nonnegative integer, got '" + v + "'");
  }
}

bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw ConfigError(key + ": expected true/false, got '" + v + "'");
}

std::string fmt17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string json_escape(const std::string& s) {
  std::string out;
  out.reserve(s.size() + 2);
  for (const char c : s) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\t': out += "\\t"; break;
      case '\r': out += "\\r"; break;
      default:
        if (static_cast<unsigned char>(c) < 0x20) {
          char buf[8];
          std::snprintf(buf, sizeof(buf), "\\u%04x", c);
          out += buf;
        } else {
          out += c;
        }
    }
  }
  return out;
}

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

// Sweeps the schedule index as the iteration counter: x_{alpha_1}, x_{alpha_2}, ...
// with the same stopping semantics as the iterative methods.
SolverTrace tikhonov_sweep(const DenseMatrix& A, const RealVector& y,
                           const AlphaSchedule& alphas, const StoppingRule& stop,
                           const RealVector* x_exact) {
  SolverTrace trace;
  const auto t0 = Clock::now();
  for (int i = 1;; ++i) {
    RealVector x;
    try {
      x = tikhonov(A, y, alphas.alpha(i));
    } catch (const FactorizationError&) {
      trace.stop_reason = StopReason::breakdown;
      break;
    } catch (const ContractViolation&) {  // schedule underflow
      trace.stop_reason = StopReason::breakdown;
      break;
    }
    TraceRow row;
    row.n = i;
    row.ls_residual = (A * x - y).norm();
    if (x_exact != nullptr) row.error = (x - *x_exact).norm();
    row.t_wall = seconds_since(t0);
    row.x = std::move(x);
    trace.rows.push_back(std::move(row));
    const StopDecision d = should_stop(stop, trace);
    if (d.stop) {
      trace.stop_reason = d.reason;
      break;
    }
  }
  return trace;
}

struct CellOutcome {
  std::string stop_reason;
  int n_stop = 1;
  double error = 0.0;
  double residual = 0.0;
  std::string alpha_spec;
};

CellOutcome run_cell(const ExperimentConfig& cfg, const LinearProblem& prob,
                     const std::string& method, const RealVector& y_data,
                     double delta_abs) {
  const AlphaSchedule sched = cfg.schedule();
  const bool noise_free = delta_abs == 0.0;
  const bool oracle_rule = noise_free || cfg.oracle_stopping;
  const StoppingRule rule = oracle_rule
                                ? StoppingRule::oracle_best(cfg.n_max)
                                : StoppingRule::discrepancy(cfg.tau, delta_abs, cfg.n_max);

  CellOutcome out;
  out.alpha_spec = sched.describe();

  if (method == "aggregate") {
    out.alpha_spec += ";N=" + std::to_string(cfg.aggregate_count);
    try {
      const AggregateResult agg = aggregate(prob.A, y_data, sched.first(cfg.aggregate_count));
      out.stop_reason = to_string(StopReason::budget);
      out.n_stop = 1;  // reported as a single step; solve count lives in alpha_spec
      out.error = (agg.x - prob.x_exact).norm();
      out.residual = (prob.A * agg.x - y_data).norm();
    } catch (const NearSingularError&) {
      out.stop_reason = to_string(StopReason::breakdown);
      out.n_stop = 1;
      out.error = prob.x_exact.norm();
      out.residual = y_data.norm();
    } catch (const FactorizationError&) {
      out.stop_reason = to_string(StopReason::breakdown);
      out.n_stop = 1;
      out.error = prob.x_exact.norm();
      out.residual = y_data.norm();
    }
    return out;
  }
  if (method == "cgne") out.alpha_spec = "none";

  SolverTrace trace;
  if (method == "tikhonov") {
    trace = tikhonov_sweep(prob.A, y_data, sched, rule, &prob.x_exact);
  } else if (method == "cgne") {
    trace = cgne(prob.A, y_data, rule, &prob.x_exact);
  } else if (method == "lanczos_kr") {
    trace = lanczos_kr(prob.A, y_data, sched, rule, &prob.x_exact);
  } else if (method == "rational_cg") {
    trace = rational_cg(prob.A, y_data, sched, rule, &prob.x_exact);
  } else {
    throw ConfigError("methods: unknown method '" + method + "'");
  }

  if (trace.empty()) {
    out.stop_reason = to_string(trace.stop_reason);
    out.n_stop = 1;
    out.error = prob.x_exact.norm();
    out.residual = y_data.norm();
    return out;
  }
  if (oracle_rule) {
    const int best = oracle_best_index(trace);
    const TraceRow& row = trace.rows[best - 1];
    // Early breakdown/stagnation keeps its reason; a run that exhausted the budget
    // reports the post-hoc selection.
    out.stop_reason = to_string(trace.stop_reason == StopReason::oracle_best ||
                                        trace.stop_reason == StopReason::budget
                                    ? StopReason::oracle_best
                                    : trace.stop_reason);
    out.n_stop = row.n;
    out.error = row.error;
    out.residual = row.ls_residual;
  } else {
    const TraceRow& row = trace.back();
    out.stop_reason = to_string(trace.stop_reason);
    out.n_stop = row.n;
    out.error = row.error;
    out.residual = row.ls_residual;
  }
  return out;
}

}  // namespace

AlphaSchedule ExperimentConfig::schedule() const {
  if (alphas_kind == "default") return AlphaSchedule::standard();
  return AlphaSchedule::geometric(alphas_a, alphas_q, alphas_s);
}

ExperimentConfig parse_config_text(const std::string& text) {
  ExperimentConfig cfg;
  std::stringstream ss(text);
  std::string line;
  int lineno = 0;
  while (std::getline(ss, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const std::string t = trim(line);
    if (t.empty()) continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("line " + std::to_string(lineno) + ": expected 'key = value', got '" +
                        t + "'");
    }
    apply_override(cfg, trim(t.substr(0, eq)), trim(t.substr(eq + 1)));
  }
  return cfg;
}

ExperimentConfig parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str());
}

void apply_override(ExperimentConfig& cfg, const std::string& key, const std::string& value) {
  if (key == "problem.name") {
    cfg.problem_name = value;
  } else if (key == "problem.size") {
    cfg.problem_size = parse_int(key, value);
  } else if (key == "methods") {
    cfg.methods = split_list(value);
  } else if (key == "alphas.kind") {
    cfg.alphas_kind = value;
  } else if (key == "alphas.a") {
    cfg.alphas_a = parse_double(key, value);
  } else if (key == "alphas.q") {
    cfg.alphas_q = parse_double(key, value);
  } else if (key == "alphas.s") {
    cfg.alphas_s = parse_int(key, value);
  } else if (key == "noise.deltas") {
    cfg.deltas.clear();
    for (const std::string& d : split_list(value)) cfg.deltas.push_back(parse_double(key, d));
  } else if (key == "noise.seeds") {
    cfg.seeds.clear();
    for (const std::string& s : split_list(value)) cfg.seeds.push_back(parse_seed(key, s));
  } else if (key == "stopping.tau") {
    cfg.tau = parse_double(key, value);
  } else if (key == "stopping.n_max") {
    cfg.n_max = parse_int(key, value);
  } else if (key == "stopping.oracle") {
    cfg.oracle_stopping = parse_bool(key, value);
  } else if (key == "aggregate.count") {
    cfg.aggregate_count = parse_int(key, value);
  } else if (key == "smooth_solution") {
    cfg.smooth_solution = parse_bool(key, value);
  } else if (key == "output.path") {
    cfg.output_path = value;
  } else if (key == "output.format") {
    cfg.output_format = value;
  } else {
    throw ConfigError("unknown config key '" + key + "'");
  }
}

void validate(const ExperimentConfig& cfg) {
  const auto names = problem_names();
  if (std::find(names.begin(), names.end(), cfg.problem_name) == names.end()) {
    throw ConfigError("problem.name: unknown problem '" + cfg.problem_name + "'");
  }
  if (cfg.problem_size < 4) throw ConfigError("problem.size: must be at least 4");
  if ((cfg.problem_name == "shaw" || cfg.problem_name == "phillips") &&
      cfg.problem_size % 2 != 0) {
    throw ConfigError("problem.size: " + cfg.problem_name + " requires an even size");
  }
  if (cfg.methods.empty()) throw ConfigError("methods: at least one method is required");
  for (const std::string& m : cfg.methods) {
    if (std::find(kMethods.begin(), kMethods.end(), m) == kMethods.end()) {
      throw ConfigError("methods: unknown method '" + m + "'");
    }
  }
  if (cfg.alphas_kind != "default" && cfg.alphas_kind != "geometric") {
    throw ConfigError("alphas.kind: must be 'default' or 'geometric'");
  }
  if (cfg.alphas_kind == "geometric") {
    if (!(cfg.alphas_a > 0.0)) throw ConfigError("alphas.a: must be positive");
    if (!(cfg.alphas_q > 1.0)) throw ConfigError("alphas.q: must exceed 1");
  }
  bool any_noisy = false;
  for (const double d : cfg.deltas) {
    if (d < 0.0) throw ConfigError("noise.deltas: must be nonnegative");
    if (d > 0.0) any_noisy = true;
  }
  if (cfg.deltas.empty()) throw ConfigError("noise.deltas: at least one level is required");
  if (any_noisy && cfg.seeds.empty()) {
    throw ConfigError("noise.seeds: required when any noise.deltas entry is positive");
  }
  if (!(cfg.tau > 1.0)) throw ConfigError("stopping.tau: must exceed 1");
  if (cfg.n_max < 1) throw ConfigError("stopping.n_max: must be at least 1");
  if (cfg.aggregate_count < 1) throw ConfigError("aggregate.count: must be at least 1");
  if (cfg.output_format != "csv" && cfg.output_format != "json") {
    throw ConfigError("output.format: must be 'csv' or 'json'");
  }
  if (cfg.output_path.empty()) throw ConfigError("output.path: must not be empty");
}

std::vector<RunRecord> run_experiment(const ExperimentConfig& cfg) {
  validate(cfg);
  LinearProblem prob = make_problem(cfg.problem_name, cfg.problem_size);
  if (cfg.smooth_solution) prob = smooth_variant(prob);

  std::vector<RunRecord> records;
  for (const std::string& method : cfg.methods) {
    for (const double delta : cfg.deltas) {
      const std::vector<std::uint64_t> cell_seeds =
          delta > 0.0 ? cfg.seeds : std::vector<std::uint64_t>{0};
      for (const std::uint64_t seed : cell_seeds) {
        const NoisySample ns = add_noise(prob, delta, seed);
        const auto t0 = Clock::now();
        const CellOutcome oc = run_cell(cfg, prob, method, ns.y_delta, ns.delta_abs);
        RunRecord rec;
        rec.problem = prob.name;
        rec.size = cfg.problem_size;
        rec.method = method;
        rec.delta = delta;
        rec.seed = seed;
        rec.stop_reason = oc.stop_reason;
        rec.n_stop = oc.n_stop;
        rec.error = oc.error;
        rec.residual = oc.residual;
        rec.time_s = seconds_since(t0);
        rec.alpha_spec = oc.alpha_spec;
        records.push_back(std::move(rec));
      }
    }
  }
  std::sort(records.begin(), records.end(), [](const RunRecord& a, const RunRecord& b) {
    return std::tie(a.problem, a.size, a.method, a.delta, a.seed) <
           std::tie(b.problem, b.size, b.method, b.delta, b.seed);
  });
  return records;
}

SlopeFit fit_loglog_slope(const std::vector<double>& deltas,
                          const std::vector<double>& errors) {
  if (deltas.size() != errors.size() || deltas.size() < 2) {
    throw ContractViolation("fit_loglog_slope: needs matching lists of length >= 2");
  }
  const int n = static_cast<int>(deltas.size());
  std::vector<double> X(n), Y(n);
  for (int i = 0; i < n; ++i) {
    if (!(deltas[i] > 0.0)) throw ContractViolation("fit_loglog_slope: deltas must be positive");
    X[i] = std::log(deltas[i]);
    Y[i] = std::log(std::max(errors[i], 1e-300));
  }
  double mx = 0.0, my = 0.0;
  for (int i = 0; i < n; ++i) {
    mx += X[i];
    my += Y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (int i = 0; i < n; ++i) {
    sxx += (X[i] - mx) * (X[i] - mx);
    sxy += (X[i] - mx) * (Y[i] - my);
    syy += (Y[i] - my) * (Y[i] - my);
  }
  SlopeFit out;
  if (syy == 0.0 || sxx == 0.0) {
    out.degenerate = true;
    return out;
  }
  out.slope = sxy / sxx;
  return out;
}

RateSweepResult rate_sweep(const ExperimentConfig& cfg) {
  validate(cfg);
  std::vector<double> levels;
  for (const double d : cfg.deltas) {
    if (d > 0.0) levels.push_back(d);
  }
  if (levels.size() < 4) {
    throw ConfigError("noise.deltas: rate sweep needs at least 4 positive noise levels");
  }
  const auto [lo, hi] = std::minmax_element(levels.begin(), levels.end());
  if (*hi / *lo < 100.0) {
    throw ConfigError("noise.deltas: rate sweep needs levels spanning at least 2 decades");
  }
  if (cfg.seeds.size() < 3) {
    throw ConfigError("noise.seeds: rate sweep needs at least 3 seeds");
  }

  const LinearProblem base = make_problem(cfg.problem_name, cfg.problem_size);
  RateSweepResult out;
  for (const std::string& variant : {std::string("default"), std::string("smooth")}) {
    const LinearProblem prob = variant == "smooth" ? smooth_variant(base) : base;
    for (const std::string& method : cfg.methods) {
      std::vector<double> gmeans;
      for (const double delta : levels) {
        double log_sum = 0.0;
        for (const std::uint64_t seed : cfg.seeds) {
          const NoisySample ns = add_noise(prob, delta, seed);
          const CellOutcome oc = run_cell(cfg, prob, method, ns.y_delta, ns.delta_abs);
          log_sum += std::log(std::max(oc.error, 1e-300));
        }
        const double gmean = std::exp(log_sum / static_cast<double>(cfg.seeds.size()));
        gmeans.push_back(gmean);
        out.points.push_back({method, variant, delta, gmean});
      }
      out.fits.push_back({method, variant, fit_loglog_slope(levels, gmeans)});
    }
  }
  return out;
}

std::string emit_csv(const std::vector<RunRecord>& records) {
  if (records.empty()) throw ContractViolation("emit: records must be nonempty");
  std::string out = "problem,size,method,delta,seed,stop_reason,n_stop,error,residual,time_s,alpha_spec\n";
  for (const RunRecord& r : records) {
    out += r.problem + ',' + std::to_string(r.size) + ',' + r.method + ',' + fmt17(r.delta) +
           ',' + std::to_string(r.seed) + ',' + r.stop_reason + ',' + std::to_string(r.n_stop) +
           ',' + fmt17(r.error) + ',' + fmt17(r.residual) + ',' + fmt17(r.time_s) + ',' +
           r.alpha_spec + '\n';
  }
  return out;
}

std::string emit_json(const std::vector<RunRecord>& records) {
  if (records.empty()) throw ContractViolation("emit: records must be nonempty");
  std::string out = "[\n";
  for (std::size_t i = 0; i < records.size(); ++i) {
    const RunRecord& r = records[i];
    out += "  {\"problem\":\"" + json_escape(r.problem) + "\",\"size\":" + std::to_string(r.size) +
           ",\"method\":\"" + json_escape(r.method) + "\",\"delta\":" + fmt17(r.delta) +
           ",\"seed\":" + std::to_string(r.seed) + ",\"stop_reason\":\"" +
           json_escape(r.stop_reason) + "\",\"n_stop\":" + std::to_string(r.n_stop) +
           ",\"error\":" + fmt17(r.error) + ",\"residual\":" + fmt17(r.residual) +
           ",\"time_s\":" + fmt17(r.time_s) + ",\"alpha_spec\":\"" + json_escape(r.alpha_spec) +
           "\"}";
    out += i + 1 < records.size() ? ",\n" : "\n";
  }
  out += "]\n";
  return out;
}

void emit_file(const std::vector<RunRecord>& records, const std::string& format,
               const std::string& path) {
  const std::string body = format == "json" ? emit_json(records) : emit_csv(records);
  std::ofstream outf(path);
  if (!outf) throw ConfigError("output.path: cannot write '" + path + "'");
  outf << body;
  if (!outf.good()) throw ConfigError("output.path: write failed for '" + path + "'");
}

std::string rates_csv(const RateSweepResult& result) {
  std::string out = "method,variant,delta,gmean_error,slope,degenerate\n";
  for (const RatePoint& p : result.points) {
    double slope = 0.0;
    bool degen = false;
    for (const RateFit& f : result.fits) {
      if (f.method == p.method && f.variant == p.variant) {
        slope = f.fit.slope;
        degen = f.fit.degenerate;
      }
    }
    out += p.method + ',' + p.variant + ',' + fmt17(p.delta) + ',' + fmt17(p.gmean_error) +
           ',' + fmt17(slope) + ',' + (degen ? "1" : "0") + '\n';
  }
  return out;
}

}  // namespace ratkryl
