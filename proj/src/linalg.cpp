#include "skewgp/linalg.hpp"

#include "skewgp/errors.hpp"

#include <cmath>
#include <string>

namespace skewgp {

double Cholesky::log_det() const {
  return 2.0 * llt.matrixLLT().diagonal().array().log().sum();
}

long failing_leading_minor(const Matrix& a) {
  const Index n = a.rows();
  Matrix l = Matrix::Zero(n, n);
  for (Index j = 0; j < n; ++j) {
    double d = a(j, j) - l.row(j).head(j).squaredNorm();
    if (!(d > 0.0)) return static_cast<long>(j + 1);
    l(j, j) = std::sqrt(d);
    for (Index i = j + 1; i < n; ++i) {
      l(i, j) = (a(i, j) - l.row(i).head(j).dot(l.row(j).head(j))) / l(j, j);
    }
  }
  return 0;
}

Cholesky jittered_cholesky(const Matrix& a, std::string_view what) {
  if (a.rows() != a.cols()) {
    throw ValidationError(std::string(what) + " is not square");
  }
  Cholesky out;
  if (a.rows() == 0) {
    out.llt.compute(a);
    return out;
  }
  out.llt.compute(a);
  if (out.llt.info() == Eigen::Success) return out;

  const double mean_diag = a.diagonal().mean();
  const double scale = mean_diag > 0.0 ? mean_diag : 1.0;
  Matrix work = a;
  for (double eps = 1e-10 * scale; eps <= 1e-6 * scale * (1.0 + 1e-12); eps *= 2.0) {
    work.diagonal() = a.diagonal().array() + eps;
    out.llt.compute(work);
    if (out.llt.info() == Eigen::Success) {
      out.jitter = eps;
      return out;
    }
  }
  work.diagonal() = a.diagonal().array() + 1e-6 * scale;
  const long minor = failing_leading_minor(work);
  throw FactorizationError(std::string(what) + " is not positive definite after jitter (leading minor " +
                               std::to_string(minor) + " of " + std::to_string(a.rows()) + " fails)",
                           minor);
}

void require_symmetric(const Matrix& a, double rel_tol, std::string_view what) {
  if (a.rows() != a.cols()) {
    throw ValidationError(std::string(what) + " is not square");
  }
  const double scale = a.size() ? a.cwiseAbs().maxCoeff() : 0.0;
  const double asym = a.size() ? (a - a.transpose()).cwiseAbs().maxCoeff() : 0.0;
  if (asym > rel_tol * std::max(scale, 1e-300)) {
    throw ValidationError(std::string(what) + " is not symmetric");
  }
}

Matrix select(const Matrix& a, const IndexList& rows, const IndexList& cols) {
  Matrix out(static_cast<Index>(rows.size()), static_cast<Index>(cols.size()));
  for (Index i = 0; i < out.rows(); ++i) {
    for (Index j = 0; j < out.cols(); ++j) out(i, j) = a(rows[i], cols[j]);
  }
  return out;
}

Vector select(const Vector& v, const IndexList& idx) {
  Vector out(static_cast<Index>(idx.size()));
  for (Index i = 0; i < out.size(); ++i) out(i) = v(idx[i]);
  return out;
}

Matrix select_rows(const Matrix& a, const IndexList& rows) {
  Matrix out(static_cast<Index>(rows.size()), a.cols());
  for (Index i = 0; i < out.rows(); ++i) out.row(i) = a.row(rows[i]);
  return out;
}

void symmetrize(Matrix& a) {
  a = 0.5 * (a + a.transpose()).eval();
}

}  // namespace skewgp
