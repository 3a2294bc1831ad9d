#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ratkryl/types.hpp"

namespace ratkryl {

// A discretized first-kind Fredholm problem: y_exact = A * x_exact by construction.
struct LinearProblem {
  std::string name;
  DenseMatrix A;
  RealVector x_exact;
  RealVector y_exact;
};

// Noisy data at an exactly realized noise level: ||y_delta - y_exact|| == delta_abs.
struct NoisySample {
  RealVector y_delta;
  double delta_abs = 0.0;
  double delta_rel = 0.0;
  std::uint64_t seed = 0;
};

std::vector<std::string> problem_names();

// Midpoint-rule collocation of the named kernel on its standard domain, with the
// standard exact solution sampled at the nodes. Deterministic: same (name, n) gives
// identical bits. Requires n >= 4; n even for shaw and phillips (quadrature symmetry).
LinearProblem make_problem(const std::string& name, int n);

// Same operator, smoother exact solution x <- A^T A x (and y recomputed).
LinearProblem smooth_variant(const LinearProblem& p);

// y_delta = y_exact + c*w with w ~ iid standard normal (seeded, Box-Muller over
// mt19937_64) and c chosen so the noise norm equals delta_rel * ||y_exact|| exactly.
NoisySample add_noise(const LinearProblem& p, double delta_rel, std::uint64_t seed);

}  // namespace ratkryl
