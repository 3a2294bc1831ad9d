#pragma once

#include <optional>
#include <vector>

#include "ratkryl/types.hpp"

namespace ratkryl {

// Relative breakdown threshold for orthonormalization: ||q~|| <= kBreakdownTol * ||v||.
inline constexpr double kBreakdownTol = 1e-12;

// Hard pivot-ratio floor for dense least squares.
inline constexpr double kLsqPivotTol = 1e-12;

// Throws ContractViolation if any entry of A is non-finite.
void require_finite(const DenseMatrix& A, const char* what);
void require_finite(const RealVector& v, const char* what);

// A * x.
RealVector matvec(const DenseMatrix& A, const RealVector& x);

// A^T (A x). The normal-equation operator is applied as two matvecs; A^T A is never formed
// for operator application (only inside Tikhonov factorizations, which need the shift).
RealVector gram_apply(const DenseMatrix& A, const RealVector& x);

// Cached symmetric positive definite factorization of (A^T A + alpha I), alpha > 0.
class TikhonovFactorization {
 public:
  TikhonovFactorization(const DenseMatrix& A, double alpha);

  RealVector solve(const RealVector& rhs) const;
  // One factorization, many back-substitutions.
  std::vector<RealVector> solve_multi(const std::vector<RealVector>& rhs_list) const;

  double alpha() const { return alpha_; }
  Eigen::Index dimension() const { return dim_; }

 private:
  double alpha_;
  Eigen::Index dim_;
  Eigen::LLT<DenseMatrix> llt_;
};

TikhonovFactorization tikhonov_factorize(const DenseMatrix& A, double alpha);

std::vector<RealVector> tikhonov_solve_multi(const TikhonovFactorization& F,
                                             const std::vector<RealVector>& rhs_list);

// Minimizer of ||B c - y|| via column-pivoted QR. Throws NearSingularError when the
// pivot ratio min|R_kk| / max|R_kk| is at or below kLsqPivotTol (minimizer not unique
// at working precision).
RealVector dense_least_squares(const DenseMatrix& B, const RealVector& y);

// Result of orthonormalizing v against an orthonormal set. On breakdown
// (pre-normalization norm <= kBreakdownTol * ||v||) q is absent.
struct OrthoResult {
  std::optional<RealVector> q;
  double norm_before_normalize = 0.0;
  bool breakdown() const { return !q.has_value(); }
};

// Modified Gram-Schmidt with one unconditional reorthogonalization pass; keeps the
// returned vector orthogonal to Q at 1e-10 even for ill-conditioned late iterations.
OrthoResult orthonormalize_against(const RealVector& v, const std::vector<RealVector>& Q);

}  // namespace ratkryl
