#include "ratkryl/problems.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "ratkryl/linops.hpp"

namespace ratkryl {

namespace {

constexpr double kPi = std::numbers::pi;

// Midpoint nodes t_i = lo + (i + 1/2) h, h = (hi - lo) / n.
RealVector midpoint_nodes(int n, double lo, double hi) {
  const double h = (hi - lo) / n;
  RealVector t(n);
  for (int i = 0; i < n; ++i) t[i] = lo + (i + 0.5) * h;
  return t;
}

LinearProblem make_deriv2(int n) {
  const double h = 1.0 / n;
  const RealVector t = midpoint_nodes(n, 0.0, 1.0);
  DenseMatrix A(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const double s = t[i], u = t[j];
      A(i, j) = h * (s <= u ? s * (u - 1.0) : u * (s - 1.0));
    }
  }
  return {"deriv2", std::move(A), t, {}};
}

LinearProblem make_shaw(int n) {
  const double h = kPi / n;
  const RealVector t = midpoint_nodes(n, -kPi / 2.0, kPi / 2.0);
  DenseMatrix A(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const double u = kPi * (std::sin(t[i]) + std::sin(t[j]));
      // sinc(u) continuous through u = 0
      const double sinc = std::abs(u) > 1e-14 ? std::sin(u) / u : 1.0;
      const double c = std::cos(t[i]) + std::cos(t[j]);
      A(i, j) = h * c * c * sinc * sinc;
    }
  }
  RealVector x(n);
  for (int i = 0; i < n; ++i) {
    x[i] = 2.0 * std::exp(-6.0 * (t[i] - 0.8) * (t[i] - 0.8)) +
           1.0 * std::exp(-2.0 * (t[i] + 0.5) * (t[i] + 0.5));
  }
  return {"shaw", std::move(A), std::move(x), {}};
}

LinearProblem make_phillips(int n) {
  const double h = 12.0 / n;
  const RealVector t = midpoint_nodes(n, -6.0, 6.0);
  DenseMatrix A(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const double d = t[i] - t[j];
      A(i, j) = std::abs(d) < 3.0 ? h * (1.0 + std::cos(kPi * d / 3.0)) : 0.0;
    }
  }
  RealVector x(n);
  for (int i = 0; i < n; ++i) {
    x[i] = std::abs(t[i]) < 3.0 ? 1.0 + std::cos(kPi * t[i] / 3.0) : 0.0;
  }
  return {"phillips", std::move(A), std::move(x), {}};
}

LinearProblem make_gravity(int n) {
  constexpr double kDepth = 0.25;
  const double h = 1.0 / n;
  const RealVector t = midpoint_nodes(n, 0.0, 1.0);
  DenseMatrix A(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const double d = t[i] - t[j];
      A(i, j) = h * kDepth * std::pow(kDepth * kDepth + d * d, -1.5);
    }
  }
  RealVector x(n);
  for (int i = 0; i < n; ++i) {
    x[i] = std::sin(kPi * t[i]) + 0.5 * std::sin(2.0 * kPi * t[i]);
  }
  return {"gravity", std::move(A), std::move(x), {}};
}

}  // namespace

std::vector<std::string> problem_names() {
  return {"deriv2", "shaw", "phillips", "gravity"};
}

LinearProblem make_problem(const std::string& name, int n) {
  if (n < 4) {
    throw ContractViolation("make_problem: n must be at least 4");
  }
  if ((name == "shaw" || name == "phillips") && n % 2 != 0) {
    throw ContractViolation("make_problem: " + name + " requires even n");
  }
  LinearProblem p;
  if (name == "deriv2") {
    p = make_deriv2(n);
  } else if (name == "shaw") {
    p = make_shaw(n);
  } else if (name == "phillips") {
    p = make_phillips(n);
  } else if (name == "gravity") {
    p = make_gravity(n);
  } else {
    std::ostringstream os;
    os << "make_problem: unknown problem '" << name
       << "' (known: deriv2, shaw, phillips, gravity)";
    throw ContractViolation(os.str());
  }
  p.y_exact = p.A * p.x_exact;
  return p;
}

LinearProblem smooth_variant(const LinearProblem& p) {
  LinearProblem out;
  out.name = p.name + "_smooth";
  out.A = p.A;
  out.x_exact = gram_apply(p.A, p.x_exact);
  out.y_exact = out.A * out.x_exact;
  return out;
}

NoisySample add_noise(const LinearProblem& p, double delta_rel, std::uint64_t seed) {
  if (delta_rel < 0.0) {
    throw ContractViolation("add_noise: delta_rel must be nonnegative");
  }
  NoisySample s;
  s.delta_rel = delta_rel;
  s.seed = seed;
  if (delta_rel == 0.0) {
    s.y_delta = p.y_exact;
    s.delta_abs = 0.0;
    return s;
  }
  const Eigen::Index m = p.y_exact.size();
  std::mt19937_64 eng(seed);
  // Box-Muller over uniforms built from the top 53 bits; published algorithms end to
  // end, so the stream is reproducible across standard libraries.
  auto unif = [&eng]() { return (static_cast<double>(eng() >> 11) + 0.5) * 0x1.0p-53; };
  RealVector w(m);
  for (Eigen::Index i = 0; i < m; i += 2) {
    const double u1 = unif(), u2 = unif();
    const double rad = std::sqrt(-2.0 * std::log(u1));
    w[i] = rad * std::cos(2.0 * kPi * u2);
    if (i + 1 < m) w[i + 1] = rad * std::sin(2.0 * kPi * u2);
  }
  s.delta_abs = delta_rel * p.y_exact.norm();
  s.y_delta = p.y_exact + (s.delta_abs / w.norm()) * w;
  return s;
}

}  // namespace ratkryl
