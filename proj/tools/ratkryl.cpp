// Experiment CLI: reproduces the solver comparison tables and rate figures as
// machine-readable files.
//
//   ratkryl run --config <path> [--override key=value]... [--strict]
//   ratkryl rates --config <path> [--override key=value]...
//   ratkryl oracle-check --problem <name> --size <n> --steps <k>   (debug)
//   ratkryl list-problems
//
// Exit codes: 0 success, 1 config error, 2 solver failure in strict mode.

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "ratkryl/harness.hpp"
#include "ratkryl/linops.hpp"
#include "ratkryl/oracle.hpp"
#include "ratkryl/problems.hpp"
#include "ratkryl/solvers.hpp"
#include "ratkryl/stopping.hpp"

namespace {

using namespace ratkryl;

ExperimentConfig load_config(const std::string& path,
                             const std::vector<std::string>& overrides) {
  ExperimentConfig cfg = parse_config_file(path);
  for (const std::string& ov : overrides) {
    const auto eq = ov.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("--override: expected key=value, got '" + ov + "'");
    }
    apply_override(cfg, ov.substr(0, eq), ov.substr(eq + 1));
  }
  validate(cfg);
  return cfg;
}

int cmd_run(const std::string& config_path, const std::vector<std::string>& overrides,
            bool strict) {
  const ExperimentConfig cfg = load_config(config_path, overrides);
  const std::vector<RunRecord> records = run_experiment(cfg);
  emit_file(records, cfg.output_format, cfg.output_path);
  int failures = 0;
  for (const RunRecord& r : records) {
    if (r.stop_reason == "breakdown" || r.stop_reason == "stagnation") ++failures;
  }
  std::printf("wrote %zu records to %s (%d abnormal stops)\n", records.size(),
              cfg.output_path.c_str(), failures);
  if (strict && failures > 0) return 2;
  return 0;
}

int cmd_rates(const std::string& config_path, const std::vector<std::string>& overrides) {
  const ExperimentConfig cfg = load_config(config_path, overrides);
  const RateSweepResult result = rate_sweep(cfg);
  std::ofstream outf(cfg.output_path);
  if (!outf) throw ConfigError("output.path: cannot write '" + cfg.output_path + "'");
  outf << rates_csv(result);
  for (const RateFit& f : result.fits) {
    std::printf("%-12s %-8s slope % .4f%s\n", f.method.c_str(), f.variant.c_str(),
                f.fit.slope, f.fit.degenerate ? "  (degenerate fit)" : "");
  }
  std::printf("wrote per-point data to %s\n", cfg.output_path.c_str());
  return 0;
}

// Side-by-side residuals of both short-recurrence solvers against the brute-force
// subspace minimizer, with the oracle's rank diagnostics per step.
int cmd_oracle_check(const std::string& problem, int size, int steps) {
  const LinearProblem prob = make_problem(problem, size);
  const AlphaSchedule alphas = AlphaSchedule::standard();
  const StoppingRule rule = StoppingRule::budget(steps);
  const SolverTrace cg = rational_cg(prob.A, prob.y_exact, alphas, rule, &prob.x_exact);
  const SolverTrace lz = lanczos_kr(prob.A, prob.y_exact, alphas, rule, &prob.x_exact);
  const oracle::ExplicitBasis full =
      oracle::explicit_basis(prob.A, prob.y_exact, alphas, steps);
  std::printf("%-3s %-13s %-13s %-13s %-9s %-9s %-5s %-4s\n", "n", "oracle_res", "ratcg_res",
              "lanczos_res", "cg_rel", "lz_rel", "rank", "kept");
  for (int n = 1; n <= steps; ++n) {
    oracle::ExplicitBasis prefix;
    prefix.columns = full.columns.leftCols(n);
    prefix.n_requested = n;
    prefix.effective_rank = oracle::effective_rank(prefix.columns);
    const oracle::SubspaceLsq lsq = oracle::lsq_over_subspace(prob.A, prob.y_exact, prefix);
    const double oracle_res = lsq.residual_norm;
    const bool have_cg = n <= cg.size();
    const bool have_lz = n <= lz.size();
    const double cg_res = have_cg ? cg.rows[n - 1].ls_residual : -1.0;
    const double lz_res = have_lz ? lz.rows[n - 1].ls_residual : -1.0;
    const double denom = std::max(oracle_res, 1e-300);
    std::printf("%-3d %-13.6e %-13.6e %-13.6e %-9.2e %-9.2e %-5d %-4d%s\n", n, oracle_res,
                cg_res, lz_res, have_cg ? std::abs(cg_res - oracle_res) / denom : -1.0,
                have_lz ? std::abs(lz_res - oracle_res) / denom : -1.0,
                prefix.effective_rank, lsq.kept,
                (prefix.effective_rank < n || lsq.kept < n) ? "  <- rank loss" : "");
  }
  return 0;
}

int cmd_list_problems() {
  for (const std::string& name : problem_names()) {
    const bool even = name == "shaw" || name == "phillips";
    std::printf("%-10s square, %s\n", name.c_str(),
                even ? "even sizes >= 4" : "any size >= 4");
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"rational Krylov regularization experiment runner"};
  app.require_subcommand(1);

  std::string config_path;
  std::vector<std::string> overrides;
  bool strict = false;

  CLI::App* run = app.add_subcommand("run", "run the configured experiment cells");
  run->add_option("--config", config_path, "config file")->required();
  run->add_option("--override", overrides, "key=value overriding a config entry");
  run->add_flag("--strict", strict, "exit 2 when any cell stops abnormally");

  CLI::App* rates = app.add_subcommand("rates", "error-vs-noise slopes per method");
  rates->add_option("--config", config_path, "config file")->required();
  rates->add_option("--override", overrides, "key=value overriding a config entry");

  std::string problem = "shaw";
  int size = 32;
  int steps = 8;
  CLI::App* ocheck = app.add_subcommand("oracle-check", "debug: certify solver residuals");
  ocheck->add_option("--problem", problem, "problem name")->required();
  ocheck->add_option("--size", size, "problem size")->required();
  ocheck->add_option("--steps", steps, "subspace dimensions to check")->required();

  CLI::App* list = app.add_subcommand("list-problems", "list the generated problems");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) return cmd_run(config_path, overrides, strict);
    if (rates->parsed()) return cmd_rates(config_path, overrides);
    if (ocheck->parsed()) return cmd_oracle_check(problem, size, steps);
    if (list->parsed()) return cmd_list_problems();
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  } catch (const ContractViolation& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "solver failure: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
