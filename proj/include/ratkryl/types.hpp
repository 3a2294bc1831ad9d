#pragma once

#include <Eigen/Dense>

#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace ratkryl {

using DenseMatrix = Eigen::MatrixXd;
using RealVector = Eigen::VectorXd;

// Dimension mismatches and invalid arguments: caller bugs, not runtime conditions.
struct ContractViolation : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// Factorization of (A^T A + alpha I) hit a non-finite or non-positive pivot.
struct FactorizationError : std::runtime_error {
  double alpha;
  int pivot_index;  // 0-based row of the offending pivot, -1 if unknown
  FactorizationError(double alpha_, int pivot_index_, const std::string& msg)
      : std::runtime_error(msg), alpha(alpha_), pivot_index(pivot_index_) {}
};

// Least-squares matrix is numerically rank-deficient (pivot ratio at or below 1e-12).
struct NearSingularError : std::runtime_error {
  double pivot_ratio;
  int col_a = -1;  // most collinear column pair, when the caller identifies one
  int col_b = -1;
  NearSingularError(double ratio, const std::string& msg)
      : std::runtime_error(msg), pivot_ratio(ratio) {}
};

// Malformed experiment configuration; message carries the offending key path.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

enum class StopReason { none, discrepancy, budget, breakdown, stagnation, oracle_best };

std::string to_string(StopReason r);

// One iteration of an iterative solver. t_wall is seconds since solver entry.
struct TraceRow {
  int n = 0;                                                  // 1-based iteration index
  double ls_residual = 0.0;                                   // ||A x_n - y||
  double error = std::numeric_limits<double>::quiet_NaN();    // ||x_n - x_exact|| when known
  double t_wall = 0.0;
  RealVector x;
};

struct SolverTrace {
  std::vector<TraceRow> rows;
  StopReason stop_reason = StopReason::none;

  int size() const { return static_cast<int>(rows.size()); }
  const TraceRow& back() const { return rows.back(); }
  bool empty() const { return rows.empty(); }
};

// Optional capture of per-step solver internals for invariant tests.
// p[i] / r[i] are the search direction and normal-equation residual after step i+1.
struct DiagnosticsSink {
  std::vector<RealVector> p;
  std::vector<RealVector> r;
};

}  // namespace ratkryl
