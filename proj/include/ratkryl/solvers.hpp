#pragma once

#include <string>
#include <vector>

#include "ratkryl/stopping.hpp"
#include "ratkryl/types.hpp"

namespace ratkryl {

// Regularization parameter schedule: strictly positive, pairwise distinct.
class AlphaSchedule {
 public:
  // alpha_i = 10^(-i-1), i >= 1: the exponentially decreasing standard schedule.
  static AlphaSchedule standard();
  // alpha_i = a * q^(s - i) with a > 0, q > 1.
  static AlphaSchedule geometric(double a, double q, int s);

  // 1-based; the rational step at iteration n = 2k consumes alpha(k).
  double alpha(int i) const;
  std::vector<double> first(int k) const;
  std::string describe() const;  // comma-free descriptor for run records

 private:
  enum class Kind { standard, geometric };
  Kind kind_ = Kind::standard;
  double a_ = 0.0, q_ = 0.0;
  int s_ = 0;
};

// Orthonormal basis of the mixed rational Krylov space with its projected matrix.
// T(i,j) = <q_i, (A^T A) q_j>, evaluated as <A q_i, A q_j>. Even-indexed basis vectors
// come from shifted solves, odd-indexed ones from operator powers; the projected
// matrix is pentadiagonal with an alternating zero pattern: column 2k vanishes below
// row 2k+1, column 2k+1 below row 2k+3 (1-based).
struct KrylovBasis {
  DenseMatrix Q;
  DenseMatrix T;
  std::vector<double> alphas_used;
  bool breakdown = false;
  int breakdown_index = 0;  // step at which growth stopped; 0 when none
};

// Internal per-step state shared by the iterative solvers.
struct IterationState {
  int n = 0;
  RealVector x, r, p, p_old;
  double ls_residual_norm = 0.0;
};

// x_alpha = (A^T A + alpha I)^{-1} A^T y.
RealVector tikhonov(const DenseMatrix& A, const RealVector& y, double alpha);

// Textbook conjugate gradient on the normal equations from x_0 = 0; iterate n
// minimizes ||A x - y|| over the polynomial Krylov space of dimension n.
SolverTrace cgne(const DenseMatrix& A, const RealVector& y, const StoppingRule& stop,
                 const RealVector* x_exact = nullptr, DiagnosticsSink* diag = nullptr);

struct AggregateResult {
  RealVector x;
  RealVector coefficients;
};

// Least-squares optimal combination of the Tikhonov solutions x_{alpha_1..alpha_N},
// solved over the stacked columns A x_{alpha_i} (equivalent to the Gramian system and
// better conditioned). Near-collinear columns raise NearSingularError naming the
// most collinear pair.
AggregateResult aggregate(const DenseMatrix& A, const RealVector& y,
                          const std::vector<double>& alphas);

// Arnoldi process for the mixed rational Krylov space: q_1 = normalized A^T y, even
// steps orthonormalize (A^T A + alpha_k I)^{-1} q_{n-1}, odd steps (A^T A) q_{n-1}.
// Stops early on breakdown, returning the basis built so far.
KrylovBasis arnoldi_kr(const DenseMatrix& A, const RealVector& y,
                       const AlphaSchedule& alphas, int n_max);

// Short-recurrence iteration over the mixed rational Krylov space; iterate n is the
// least-squares minimizer over the n-dimensional space.
SolverTrace lanczos_kr(const DenseMatrix& A, const RealVector& y,
                       const AlphaSchedule& alphas, const StoppingRule& stop,
                       const RealVector* x_exact = nullptr, DiagnosticsSink* diag = nullptr);

// Conjugate-gradient form of the same iteration; identical iterates in exact
// arithmetic (the two drift apart only past numerical rank loss of the space).
SolverTrace rational_cg(const DenseMatrix& A, const RealVector& y,
                        const AlphaSchedule& alphas, const StoppingRule& stop,
                        const RealVector* x_exact = nullptr, DiagnosticsSink* diag = nullptr);

// Variant of rational_cg whose even step performs one complex shifted solve
// u = (A^T A + alpha_k I)^{-1}(p + i r) and takes p <- Im[(<(A^T A)p, conj(u)>) u];
// the direction agrees with rational_cg's up to a scalar factor, which the x-update
// absorbs.
SolverTrace rational_cg_complex_step(const DenseMatrix& A, const RealVector& y,
                                     const AlphaSchedule& alphas, const StoppingRule& stop,
                                     const RealVector* x_exact = nullptr,
                                     DiagnosticsSink* diag = nullptr);

}  // namespace ratkryl
