#include <doctest.h>

#include "ratkryl/stopping.hpp"

using namespace ratkryl;

namespace {

SolverTrace trace_with_residuals(std::initializer_list<double> residuals) {
  SolverTrace t;
  int n = 0;
  for (double r : residuals) {
    TraceRow row;
    row.n = ++n;
    row.ls_residual = r;
    t.rows.push_back(row);
  }
  return t;
}

}  // namespace

TEST_CASE("discrepancy rule") {
  // tau * delta_abs = 1.0: residuals 5, 3 keep going, 0.9 stops.
  const StoppingRule rule = StoppingRule::discrepancy(2.0, 0.5, 100);

  SUBCASE("fires on the first residual at or below the threshold") {
    SolverTrace t = trace_with_residuals({5.0});
    CHECK_FALSE(should_stop(rule, t).stop);
    t.rows.push_back({2, 3.0, 0, 0, {}});
    CHECK_FALSE(should_stop(rule, t).stop);
    t.rows.push_back({3, 0.9, 0, 0, {}});
    const StopDecision d = should_stop(rule, t);
    CHECK(d.stop);
    CHECK(d.reason == StopReason::discrepancy);
  }
  SUBCASE("threshold is inclusive") {
    const SolverTrace t = trace_with_residuals({1.0});
    CHECK(should_stop(rule, t).stop);
  }
  SUBCASE("empty trace never stops") {
    CHECK_FALSE(should_stop(rule, SolverTrace{}).stop);
  }
  SUBCASE("carries an implicit budget") {
    const StoppingRule tight = StoppingRule::discrepancy(2.0, 0.5, 2);
    const SolverTrace t = trace_with_residuals({5.0, 4.0});
    const StopDecision d = should_stop(tight, t);
    CHECK(d.stop);
    CHECK(d.reason == StopReason::budget);
  }
  SUBCASE("tau must exceed 1") {
    CHECK_THROWS_AS(StoppingRule::discrepancy(1.0, 0.5), ContractViolation);
    CHECK_THROWS_AS(StoppingRule::discrepancy(0.5, 0.5), ContractViolation);
  }
  SUBCASE("negative delta rejected") {
    CHECK_THROWS_AS(StoppingRule::discrepancy(2.0, -1.0), ContractViolation);
  }
}

TEST_CASE("budget rule") {
  const StoppingRule rule = StoppingRule::budget(3);
  CHECK_FALSE(should_stop(rule, trace_with_residuals({1})).stop);
  CHECK_FALSE(should_stop(rule, trace_with_residuals({1, 1})).stop);
  const StopDecision d = should_stop(rule, trace_with_residuals({1, 1, 1}));
  CHECK(d.stop);
  CHECK(d.reason == StopReason::budget);
  CHECK_THROWS_AS(StoppingRule::budget(0), ContractViolation);
}

TEST_CASE("oracle-best rule bounds the run and selects post hoc") {
  const StoppingRule rule = StoppingRule::oracle_best(3);
  SolverTrace t = trace_with_residuals({9, 8, 7});
  t.rows[0].error = 3.0;
  t.rows[1].error = 1.0;
  t.rows[2].error = 2.0;

  const StopDecision d = should_stop(rule, t);
  CHECK(d.stop);
  CHECK(d.reason == StopReason::oracle_best);
  CHECK(oracle_best_index(t) == 2);

  SUBCASE("rows without a recorded error are skipped") {
    t.rows[1].error = std::numeric_limits<double>::quiet_NaN();
    CHECK(oracle_best_index(t) == 3);
  }
  SUBCASE("all-unknown errors fall back to the last row") {
    for (auto& row : t.rows) row.error = std::numeric_limits<double>::quiet_NaN();
    CHECK(oracle_best_index(t) == 3);
  }
  SUBCASE("empty trace is a caller bug") {
    CHECK_THROWS_AS(oracle_best_index(SolverTrace{}), ContractViolation);
  }
}

TEST_CASE("composite rule returns the first firing member") {
  const StoppingRule rule =
      StoppingRule::composite({StoppingRule::budget(5), StoppingRule::budget(2)});
  const StopDecision d = should_stop(rule, trace_with_residuals({1, 1}));
  CHECK(d.stop);
  CHECK(d.reason == StopReason::budget);
  CHECK_FALSE(should_stop(rule, trace_with_residuals({1})).stop);
  CHECK_THROWS_AS(StoppingRule::composite({}), ContractViolation);
}

TEST_CASE("stop reasons have stable names") {
  CHECK(to_string(StopReason::none) == "none");
  CHECK(to_string(StopReason::discrepancy) == "discrepancy");
  CHECK(to_string(StopReason::budget) == "budget");
  CHECK(to_string(StopReason::breakdown) == "breakdown");
  CHECK(to_string(StopReason::stagnation) == "stagnation");
  CHECK(to_string(StopReason::oracle_best) == "oracle_best");
}
