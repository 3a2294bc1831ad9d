#include "ratkryl/stopping.hpp"

#include <cmath>

namespace ratkryl {

StoppingRule StoppingRule::discrepancy(double tau, double delta_abs, int n_max) {
  if (!(tau > 1.0)) {
    throw ContractViolation("StoppingRule::discrepancy: tau must exceed 1");
  }
  if (delta_abs < 0.0) {
    throw ContractViolation("StoppingRule::discrepancy: delta_abs must be nonnegative");
  }
  StoppingRule disc;
  disc.kind = Kind::discrepancy;
  disc.tau = tau;
  disc.delta_abs = delta_abs;
  // Implicit budget member keeps the composed rule terminating.
  return composite({disc, budget(n_max)});
}

StoppingRule StoppingRule::budget(int n_max) {
  if (n_max < 1) {
    throw ContractViolation("StoppingRule::budget: n_max must be at least 1");
  }
  StoppingRule r;
  r.kind = Kind::budget;
  r.n_max = n_max;
  return r;
}

StoppingRule StoppingRule::oracle_best(int n_max) {
  if (n_max < 1) {
    throw ContractViolation("StoppingRule::oracle_best: n_max must be at least 1");
  }
  StoppingRule r;
  r.kind = Kind::oracle_best;
  r.n_max = n_max;
  return r;
}

StoppingRule StoppingRule::composite(std::vector<StoppingRule> members) {
  if (members.empty()) {
    throw ContractViolation("StoppingRule::composite: needs at least one member");
  }
  StoppingRule r;
  r.kind = Kind::composite;
  r.members = std::move(members);
  return r;
}

StopDecision should_stop(const StoppingRule& rule, const SolverTrace& trace) {
  switch (rule.kind) {
    case StoppingRule::Kind::discrepancy: {
      if (trace.empty()) return {};
      if (trace.back().ls_residual <= rule.tau * rule.delta_abs) {
        return {true, StopReason::discrepancy};
      }
      return {};
    }
    case StoppingRule::Kind::budget: {
      if (trace.size() >= rule.n_max) return {true, StopReason::budget};
      return {};
    }
    case StoppingRule::Kind::oracle_best: {
      // Selection is post hoc; the rule only bounds the run.
      if (trace.size() >= rule.n_max) return {true, StopReason::oracle_best};
      return {};
    }
    case StoppingRule::Kind::composite: {
      for (const StoppingRule& m : rule.members) {
        const StopDecision d = should_stop(m, trace);
        if (d.stop) return d;
      }
      return {};
    }
  }
  return {};
}

int oracle_best_index(const SolverTrace& trace) {
  if (trace.empty()) {
    throw ContractViolation("oracle_best_index: empty trace");
  }
  int best = -1;
  double best_err = 0.0;
  for (const TraceRow& row : trace.rows) {
    if (std::isnan(row.error)) continue;
    if (best < 0 || row.error < best_err) {
      best = row.n;
      best_err = row.error;
    }
  }
  return best > 0 ? best : trace.back().n;
}

}  // namespace ratkryl
