#pragma once

// Shared helpers for the unit and acceptance suites.

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <utility>

#include "ratkryl/solvers.hpp"
#include "ratkryl/types.hpp"

namespace testutil {

using ratkryl::DenseMatrix;
using ratkryl::RealVector;

// Deterministic standard-normal matrix/vector for test fixtures (Box-Muller over
// mt19937_64, independent of any library distribution).
class Randn {
 public:
  explicit Randn(std::uint64_t seed) : eng_(seed) {}

  double operator()() {
    if (have_) {
      have_ = false;
      return spare_;
    }
    const double u1 = unif();
    const double u2 = unif();
    const double rad = std::sqrt(-2.0 * std::log(u1));
    spare_ = rad * std::sin(2.0 * std::numbers::pi * u2);
    have_ = true;
    return rad * std::cos(2.0 * std::numbers::pi * u2);
  }

  DenseMatrix matrix(int rows, int cols) {
    DenseMatrix A(rows, cols);
    for (int i = 0; i < rows; ++i) {
      for (int j = 0; j < cols; ++j) A(i, j) = (*this)();
    }
    return A;
  }

  RealVector vector(int n) {
    RealVector v(n);
    for (int i = 0; i < n; ++i) v[i] = (*this)();
    return v;
  }

 private:
  double unif() { return (static_cast<double>(eng_() >> 11) + 0.5) * 0x1.0p-53; }

  std::mt19937_64 eng_;
  bool have_ = false;
  double spare_ = 0.0;
};

// Worst absolute entries of the projected matrix outside the mixed-basis band.
// Even columns j = 2k carry zeros from row j+2 down. For odd columns j = 2k+1 the
// provable zero region starts at row j+3 (`odd_row_offset` = 3); offset 2 would also
// cover row j+2, which holds the required-nonzero coupling coefficient of the
// three-term recurrence and is generically large.
struct BandViolation {
  double even_cols = 0.0;  // max |T(m, j)| over even j, m >= j+2
  double odd_cols = 0.0;   // max |T(m, j)| over odd j, m >= j+odd_row_offset
};

inline BandViolation band_violation(const DenseMatrix& T, int odd_row_offset) {
  BandViolation out;
  const int n = static_cast<int>(T.rows());
  for (int j = 1; j <= n; ++j) {    // 1-based column
    for (int m = 1; m <= n; ++m) {  // 1-based row
      const double v = std::abs(T(m - 1, j - 1));
      if (j % 2 == 0 && m >= j + 2) out.even_cols = std::max(out.even_cols, v);
      if (j % 2 == 1 && m >= j + odd_row_offset) out.odd_cols = std::max(out.odd_cols, v);
    }
  }
  return out;
}

// Smallest/largest singular value ratio of the first n columns; the equivalence and
// identity checks only bind while this stays above 1e-8 (numerical rank intact).
inline double condition_ratio(const DenseMatrix& B, int n) {
  const Eigen::JacobiSVD<DenseMatrix> svd(B.leftCols(n));
  const auto& s = svd.singularValues();
  if (s.size() == 0 || s[0] == 0.0) return 0.0;
  return s[s.size() - 1] / s[0];
}

}  // namespace testutil
