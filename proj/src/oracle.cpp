#include "ratkryl/oracle.hpp"

#include <cmath>

#include "ratkryl/linops.hpp"

namespace ratkryl {
namespace oracle {

ExplicitBasis explicit_basis(const DenseMatrix& A, const RealVector& y,
                             const AlphaSchedule& alphas, int n) {
  if (n < 1) throw ContractViolation("explicit_basis: n must be at least 1");
  const RealVector ybar = A.transpose() * y;
  if (ybar.norm() == 0.0) throw ContractViolation("explicit_basis: A^T y is zero");
  ExplicitBasis out;
  out.n_requested = n;
  out.columns.resize(A.cols(), n);
  RealVector power = ybar;
  for (int i = 1; i <= n; ++i) {
    if (i == 1) {
      out.columns.col(0) = ybar;
    } else if (i % 2 == 0) {
      const int k = i / 2;
      // Direct dense solve of the shifted normal matrix, deliberately independent of
      // the Cholesky path the solvers use.
      DenseMatrix N = A.transpose() * A;
      N.diagonal().array() += alphas.alpha(k);
      out.columns.col(i - 1) = N.fullPivLu().solve(ybar);
    } else {
      power = gram_apply(A, power);
      out.columns.col(i - 1) = power;
    }
  }
  out.effective_rank = effective_rank(out.columns);
  return out;
}

int effective_rank(const DenseMatrix& B, double tol) {
  const Eigen::JacobiSVD<DenseMatrix> svd(B);
  const auto& s = svd.singularValues();
  if (s.size() == 0 || s[0] == 0.0) return 0;
  int r = 0;
  for (Eigen::Index i = 0; i < s.size(); ++i) {
    if (s[i] > tol * s[0]) ++r;
  }
  return r;
}

SubspaceLsq lsq_over_subspace(const DenseMatrix& A, const RealVector& y,
                              const ExplicitBasis& basis) {
  if (basis.columns.cols() < 1) {
    throw ContractViolation("lsq_over_subspace: empty basis");
  }
  const DenseMatrix W = A * basis.columns;
  // Column-pivoted QR identifies a well-conditioned subset; the least-squares minimum
  // over the span is insensitive to columns below the threshold.
  Eigen::ColPivHouseholderQR<DenseMatrix> qr(W);
  const Eigen::Index kmax = std::min(W.rows(), W.cols());
  const auto rdiag = qr.matrixR().diagonal().head(kmax).cwiseAbs();
  const double d0 = rdiag[0];
  int kept = 0;
  for (Eigen::Index i = 0; i < kmax; ++i) {
    // Pivoted R diagonals are non-increasing; stop at the first small one.
    if (d0 > 0.0 ? rdiag[i] > kRankTol * d0 : rdiag[i] > 0.0) {
      ++kept;
    } else {
      break;
    }
  }
  if (kept == 0) {
    throw ContractViolation("lsq_over_subspace: basis image is numerically zero");
  }
  const auto perm = qr.colsPermutation().indices();
  DenseMatrix Wk(W.rows(), kept);
  DenseMatrix Bk(basis.columns.rows(), kept);
  for (int i = 0; i < kept; ++i) {
    Wk.col(i) = W.col(perm[i]);
    Bk.col(i) = basis.columns.col(perm[i]);
  }
  const RealVector c = dense_least_squares(Wk, y);
  SubspaceLsq out;
  out.x = Bk * c;
  out.residual_norm = (Wk * c - y).norm();
  out.kept = kept;
  return out;
}

std::optional<int> detect_breakdown(const DenseMatrix& A, const RealVector& y,
                                    const AlphaSchedule& alphas, int n_max) {
  const ExplicitBasis full = explicit_basis(A, y, alphas, n_max);
  for (int n = 1; n <= n_max; ++n) {
    if (effective_rank(full.columns.leftCols(n)) < n) return n;
  }
  return std::nullopt;
}

}  // namespace oracle
}  // namespace ratkryl
