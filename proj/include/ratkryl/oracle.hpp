#pragma once

#include <optional>
#include <vector>

#include "ratkryl/solvers.hpp"
#include "ratkryl/types.hpp"

namespace ratkryl {
namespace oracle {

// Rank and truncation threshold shared by the oracle paths.
inline constexpr double kRankTol = 1e-10;

// The mixed rational Krylov space spelled out in definition order:
// A^T y, (A^T A + alpha_1 I)^{-1} A^T y, (A^T A) A^T y, (A^T A + alpha_2 I)^{-1} A^T y,
// (A^T A)^2 A^T y, ... — deliberately unorthogonalized, so this module shares no
// algorithmic path with the iterative solvers it certifies.
struct ExplicitBasis {
  DenseMatrix columns;
  int n_requested = 0;
  int effective_rank = 0;  // singular values above kRankTol * largest
};

ExplicitBasis explicit_basis(const DenseMatrix& A, const RealVector& y,
                             const AlphaSchedule& alphas, int n);

// Singular values of B above tol * largest.
int effective_rank(const DenseMatrix& B, double tol = kRankTol);

struct SubspaceLsq {
  RealVector x;
  double residual_norm = 0.0;
  int kept = 0;  // columns surviving the pivoted truncation of A * B
};

// Minimizer of ||A x - y|| over span(columns): pivoted-QR truncation of A * B at
// kRankTol selects a well-conditioned column subset (the minimum over the span is
// unchanged), then a dense least-squares solve over the kept columns.
SubspaceLsq lsq_over_subspace(const DenseMatrix& A, const RealVector& y,
                              const ExplicitBasis& basis);

// Smallest n whose explicit basis has effective rank below n, or nullopt up to n_max.
std::optional<int> detect_breakdown(const DenseMatrix& A, const RealVector& y,
                                    const AlphaSchedule& alphas, int n_max);

}  // namespace oracle
}  // namespace ratkryl
