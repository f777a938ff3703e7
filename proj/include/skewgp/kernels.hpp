#pragma once

#include "skewgp/errors.hpp"
#include "skewgp/types.hpp"

#include <cmath>
#include <string>

namespace skewgp {

enum class KernelFamily { Rbf, NeuralNet };

std::string to_string(KernelFamily family);
KernelFamily kernel_family_from_string(const std::string& name);

/// Covariance function hyperparameters. `lengthscales` holds one entry per
/// input dimension (ARD); an isotropic kernel repeats the same value.
struct KernelConfig {
  KernelFamily family = KernelFamily::Rbf;
  double variance = 1.0;
  Vector lengthscales = Vector::Ones(1);
  double nn_bias_variance = 1.0;
  double nn_weight_variance = 1.0;

  Index input_dim() const { return lengthscales.size(); }

  /// Throws ValidationError on non-positive hyperparameters or, when
  /// `input_dim` >= 0, on a lengthscale count that differs from it.
  void validate(Index input_dim = -1) const;

  static KernelConfig rbf(double variance, Vector lengthscales);
  static KernelConfig neural_net(double variance, Vector lengthscales, double bias_variance,
                                 double weight_variance);
};

/// K[i, j] = k(X.row(i), Z.row(j)).
Matrix kernel_matrix(const KernelConfig& cfg, const Matrix& X, const Matrix& Z);

/// k(x_i, x_i) for every row.
Vector kernel_diagonal(const KernelConfig& cfg, const Matrix& X);

/// Correlation-normalized cross kernel k(x, z) / sqrt(k(x, x) k(z, z)). For
/// stationary kernels this is K / sigma^2.
Matrix correlation_kernel(const KernelConfig& cfg, const Matrix& X, const Matrix& Z);

/// Positive hyperparameters mapped to log space, in the order
/// [log variance, log lengthscales..., (log bias var, log weight var)].
Vector to_log_params(const KernelConfig& cfg);
KernelConfig from_log_params(KernelFamily family, const Vector& log_params, Index input_dim);
Index n_log_params(KernelFamily family, Index input_dim);

template <typename Scalar>
struct CorrelationForm {
  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> kbar;
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> scale;  // diagonal of D
};

/// Splits a covariance into D * Kbar * D with D = diag(sqrt(diag(K))) and
/// Kbar unit-diagonal.
template <typename Derived>
CorrelationForm<typename Derived::Scalar> correlation_form(const Eigen::MatrixBase<Derived>& k) {
  using Scalar = typename Derived::Scalar;
  if (k.rows() != k.cols()) throw ValidationError("correlation_form: matrix must be square");
  CorrelationForm<Scalar> out;
  out.scale = k.diagonal();
  for (Index i = 0; i < out.scale.size(); ++i) {
    if (!(out.scale(i) > Scalar(0))) {
      throw ValidationError("correlation_form: diagonal entry " + std::to_string(i) + " is not positive");
    }
    out.scale(i) = std::sqrt(out.scale(i));
  }
  const auto inv = out.scale.cwiseInverse().asDiagonal();
  out.kbar = inv * k * inv;
  out.kbar.diagonal().setOnes();
  return out;
}

}  // namespace skewgp
