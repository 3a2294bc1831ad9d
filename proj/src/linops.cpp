#include "ratkryl/linops.hpp"

#include <cmath>
#include <sstream>

namespace ratkryl {

std::string to_string(StopReason r) {
  switch (r) {
    case StopReason::none: return "none";
    case StopReason::discrepancy: return "discrepancy";
    case StopReason::budget: return "budget";
    case StopReason::breakdown: return "breakdown";
    case StopReason::stagnation: return "stagnation";
    case StopReason::oracle_best: return "oracle_best";
  }
  return "unknown";
}

void require_finite(const DenseMatrix& A, const char* what) {
  if (!A.allFinite()) {
    throw ContractViolation(std::string(what) + ": non-finite entries");
  }
}

void require_finite(const RealVector& v, const char* what) {
  if (!v.allFinite()) {
    throw ContractViolation(std::string(what) + ": non-finite entries");
  }
}

RealVector matvec(const DenseMatrix& A, const RealVector& x) {
  if (A.cols() != x.size()) {
    std::ostringstream os;
    os << "matvec: dimension mismatch, A is " << A.rows() << "x" << A.cols()
       << " but x has length " << x.size();
    throw ContractViolation(os.str());
  }
  return A * x;
}

RealVector gram_apply(const DenseMatrix& A, const RealVector& x) {
  if (A.cols() != x.size()) {
    std::ostringstream os;
    os << "gram_apply: dimension mismatch, A is " << A.rows() << "x" << A.cols()
       << " but x has length " << x.size();
    throw ContractViolation(os.str());
  }
  return A.transpose() * (A * x);
}

namespace {

// Locates the first non-finite or non-positive pivot of a failed Cholesky attempt.
// Diagnostic path only; runs unblocked (the normal matrix is small at desk scale).
int find_bad_pivot(DenseMatrix N) {
  const Eigen::Index n = N.rows();
  for (Eigen::Index k = 0; k < n; ++k) {
    const double pivot = N(k, k);
    if (!std::isfinite(pivot) || pivot <= 0.0) return static_cast<int>(k);
    const double root = std::sqrt(pivot);
    N(k, k) = root;
    for (Eigen::Index i = k + 1; i < n; ++i) N(i, k) /= root;
    for (Eigen::Index j = k + 1; j < n; ++j) {
      for (Eigen::Index i = j; i < n; ++i) N(i, j) -= N(i, k) * N(j, k);
    }
  }
  return -1;
}

}  // namespace

TikhonovFactorization::TikhonovFactorization(const DenseMatrix& A, double alpha)
    : alpha_(alpha), dim_(A.cols()) {
  if (!(alpha > 0.0)) {
    throw ContractViolation("tikhonov_factorize: alpha must be positive");
  }
  require_finite(A, "tikhonov_factorize");
  DenseMatrix N = A.transpose() * A;
  N.diagonal().array() += alpha;
  llt_.compute(N);
  if (llt_.info() != Eigen::Success) {
    const int pivot = find_bad_pivot(N);
    std::ostringstream os;
    os << "tikhonov_factorize: Cholesky breakdown at alpha=" << alpha
       << ", pivot index " << pivot;
    throw FactorizationError(alpha, pivot, os.str());
  }
}

RealVector TikhonovFactorization::solve(const RealVector& rhs) const {
  if (rhs.size() != dim_) {
    throw ContractViolation("TikhonovFactorization::solve: rhs dimension mismatch");
  }
  return llt_.solve(rhs);
}

std::vector<RealVector> TikhonovFactorization::solve_multi(
    const std::vector<RealVector>& rhs_list) const {
  std::vector<RealVector> out;
  out.reserve(rhs_list.size());
  for (const RealVector& rhs : rhs_list) out.push_back(solve(rhs));
  return out;
}

TikhonovFactorization tikhonov_factorize(const DenseMatrix& A, double alpha) {
  return TikhonovFactorization(A, alpha);
}

std::vector<RealVector> tikhonov_solve_multi(const TikhonovFactorization& F,
                                             const std::vector<RealVector>& rhs_list) {
  return F.solve_multi(rhs_list);
}

RealVector dense_least_squares(const DenseMatrix& B, const RealVector& y) {
  if (B.rows() != y.size()) {
    throw ContractViolation("dense_least_squares: row count of B must match length of y");
  }
  if (B.rows() < 1 || B.cols() < 1) {
    throw ContractViolation("dense_least_squares: B must be nonempty");
  }
  Eigen::ColPivHouseholderQR<DenseMatrix> qr(B);
  const Eigen::Index k = std::min(B.rows(), B.cols());
  const auto rdiag = qr.matrixR().diagonal().head(k).cwiseAbs();
  const double dmax = rdiag.maxCoeff();
  const double dmin = rdiag.minCoeff();
  const double ratio = dmax > 0.0 ? dmin / dmax : 0.0;
  if (!(ratio > kLsqPivotTol)) {
    std::ostringstream os;
    os << "dense_least_squares: columns numerically dependent, pivot ratio " << ratio;
    throw NearSingularError(ratio, os.str());
  }
  return qr.solve(y);
}

OrthoResult orthonormalize_against(const RealVector& v, const std::vector<RealVector>& Q) {
  RealVector q = v;
  // Two passes of modified Gram-Schmidt: the second pass restores orthogonality lost
  // to cancellation when v is nearly in span(Q).
  for (int pass = 0; pass < 2; ++pass) {
    for (const RealVector& qj : Q) {
      q -= qj.dot(q) * qj;
    }
  }
  OrthoResult out;
  out.norm_before_normalize = q.norm();
  if (out.norm_before_normalize <= kBreakdownTol * v.norm()) {
    return out;  // breakdown: v numerically in span(Q)
  }
  out.q = q / out.norm_before_normalize;
  return out;
}

}  // namespace ratkryl
