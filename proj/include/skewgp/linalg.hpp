#pragma once

#include "skewgp/types.hpp"

#include <string_view>

namespace skewgp {

/// Cholesky factor obtained under the shared jitter policy.
struct Cholesky {
  Eigen::LLT<Matrix> llt;
  double jitter = 0.0;  // value added to the diagonal, 0 when none was needed

  Index size() const { return llt.rows(); }
  Matrix lower() const { return llt.matrixL(); }

  template <typename Rhs>
  Matrix solve(const Eigen::MatrixBase<Rhs>& rhs) const {
    return llt.solve(rhs);
  }

  double log_det() const;
};

/// Factorizes a symmetric matrix, adding 1e-10 * mean(diag) to the diagonal
/// and doubling up to 1e-6 * mean(diag) before giving up. Throws
/// FactorizationError naming the first non-positive leading minor.
Cholesky jittered_cholesky(const Matrix& a, std::string_view what = "matrix");

/// 1-based index of the first leading minor that fails to be positive, or 0
/// when the matrix is positive definite.
long failing_leading_minor(const Matrix& a);

/// Throws ValidationError if `a` is not square or not symmetric within
/// `rel_tol` relative to its largest absolute entry.
void require_symmetric(const Matrix& a, double rel_tol, std::string_view what);

/// Throws ValidationError if any entry is NaN or infinite.
template <typename Derived>
void require_finite(const Eigen::DenseBase<Derived>& a, std::string_view what);

/// Rows and columns of `a` selected by `rows` x `cols`.
Matrix select(const Matrix& a, const IndexList& rows, const IndexList& cols);
Vector select(const Vector& v, const IndexList& idx);
Matrix select_rows(const Matrix& a, const IndexList& rows);

/// Symmetrizes in place as (a + a^T) / 2.
void symmetrize(Matrix& a);

}  // namespace skewgp

#include "skewgp/errors.hpp"

#include <string>

namespace skewgp {

template <typename Derived>
void require_finite(const Eigen::DenseBase<Derived>& a, std::string_view what) {
  if (!a.derived().allFinite()) {
    throw ValidationError(std::string(what) + " contains non-finite values");
  }
}

}  // namespace skewgp
