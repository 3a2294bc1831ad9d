#pragma once

#include <vector>

#include "ratkryl/types.hpp"

namespace ratkryl {

// Default iteration cap composed into every discrepancy rule so runs always terminate.
inline constexpr int kDefaultBudget = 200;

// Stopping rules evaluated on the trace built so far. All rules are pure functions of
// the trace: evaluating twice on the same trace gives the same decision.
struct StoppingRule {
  enum class Kind { discrepancy, budget, oracle_best, composite };

  Kind kind = Kind::budget;
  double tau = 1.01;        // discrepancy only; must be > 1
  double delta_abs = 0.0;   // discrepancy only
  int n_max = kDefaultBudget;
  std::vector<StoppingRule> members;  // composite only

  // First n with ||A x_n - y|| <= tau * delta_abs, with an implicit budget so the
  // rule terminates even when the threshold is unreachable.
  static StoppingRule discrepancy(double tau, double delta_abs, int n_max = kDefaultBudget);
  static StoppingRule budget(int n_max);
  // Run to n_max, then select the smallest-error iterate post hoc (testing only;
  // requires traces with recorded errors). should_stop fires at n_max.
  static StoppingRule oracle_best(int n_max);
  static StoppingRule composite(std::vector<StoppingRule> members);
};

struct StopDecision {
  bool stop = false;
  StopReason reason = StopReason::none;
};

StopDecision should_stop(const StoppingRule& rule, const SolverTrace& trace);

// Index (1-based) of the smallest recorded error in the trace; rows without a
// recorded error are skipped. Falls back to the last row when no errors are present.
int oracle_best_index(const SolverTrace& trace);

}  // namespace ratkryl
