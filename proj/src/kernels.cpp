#include "skewgp/kernels.hpp"

#include "skewgp/linalg.hpp"
#include "skewgp/normal.hpp"

#include <algorithm>
#include <cmath>

namespace skewgp {

namespace {

void check_inputs(const KernelConfig& cfg, const Matrix& X, const Matrix& Z) {
  cfg.validate();
  if (X.cols() != cfg.input_dim() || Z.cols() != cfg.input_dim()) {
    throw ValidationError("kernel: input has " + std::to_string(X.cols()) + "/" + std::to_string(Z.cols()) +
                          " columns, kernel expects " + std::to_string(cfg.input_dim()));
  }
}

// Augmented-input quadratic form 2 * (b + sum_d w x_d z_d / l_d^2) of the
// arcsine kernel.
double nn_form(const KernelConfig& cfg, const Eigen::Ref<const Vector>& x, const Eigen::Ref<const Vector>& z) {
  const double dot = (x.array() * z.array() / cfg.lengthscales.array().square()).sum();
  return 2.0 * (cfg.nn_bias_variance + cfg.nn_weight_variance * dot);
}

double nn_kernel(const KernelConfig& cfg, const Eigen::Ref<const Vector>& x, const Eigen::Ref<const Vector>& z) {
  const double xz = nn_form(cfg, x, z);
  const double xx = nn_form(cfg, x, x);
  const double zz = nn_form(cfg, z, z);
  const double arg = std::clamp(xz / std::sqrt((1.0 + xx) * (1.0 + zz)), -1.0, 1.0);
  return cfg.variance * (2.0 / kPi) * std::asin(arg);
}

}  // namespace

std::string to_string(KernelFamily family) {
  return family == KernelFamily::Rbf ? "rbf" : "nn";
}

KernelFamily kernel_family_from_string(const std::string& name) {
  if (name == "rbf") return KernelFamily::Rbf;
  if (name == "nn") return KernelFamily::NeuralNet;
  throw ValidationError("unknown kernel family '" + name + "' (expected rbf or nn)");
}

void KernelConfig::validate(Index input_dim) const {
  if (!(variance > 0.0) || !std::isfinite(variance)) throw ValidationError("kernel variance must be positive");
  if (lengthscales.size() == 0) throw ValidationError("kernel needs at least one lengthscale");
  if (!(lengthscales.array() > 0.0).all() || !lengthscales.allFinite()) {
    throw ValidationError("kernel lengthscales must be positive");
  }
  if (input_dim >= 0 && lengthscales.size() != input_dim) {
    throw ValidationError("kernel has " + std::to_string(lengthscales.size()) + " lengthscales for input dimension " +
                          std::to_string(input_dim));
  }
  if (family == KernelFamily::NeuralNet && (!(nn_bias_variance > 0.0) || !(nn_weight_variance > 0.0))) {
    throw ValidationError("neural-net kernel variances must be positive");
  }
}

KernelConfig KernelConfig::rbf(double variance, Vector lengthscales) {
  KernelConfig cfg;
  cfg.family = KernelFamily::Rbf;
  cfg.variance = variance;
  cfg.lengthscales = std::move(lengthscales);
  return cfg;
}

KernelConfig KernelConfig::neural_net(double variance, Vector lengthscales, double bias_variance,
                                      double weight_variance) {
  KernelConfig cfg;
  cfg.family = KernelFamily::NeuralNet;
  cfg.variance = variance;
  cfg.lengthscales = std::move(lengthscales);
  cfg.nn_bias_variance = bias_variance;
  cfg.nn_weight_variance = weight_variance;
  return cfg;
}

Matrix kernel_matrix(const KernelConfig& cfg, const Matrix& X, const Matrix& Z) {
  check_inputs(cfg, X, Z);
  Matrix K(X.rows(), Z.rows());
  const bool isotropic = (cfg.lengthscales.array() == cfg.lengthscales(0)).all();
  if (cfg.family == KernelFamily::Rbf && isotropic) {
    const double l = cfg.lengthscales(0);
    for (Index i = 0; i < X.rows(); ++i) {
      for (Index j = 0; j < Z.rows(); ++j) {
        K(i, j) = cfg.variance * std::exp(-(X.row(i) - Z.row(j)).squaredNorm() / (2.0 * l * l));
      }
    }
  } else if (cfg.family == KernelFamily::Rbf) {
    const Vector inv_ls = cfg.lengthscales.cwiseInverse();
    const Matrix xs = X * inv_ls.asDiagonal();
    const Matrix zs = Z * inv_ls.asDiagonal();
    for (Index i = 0; i < X.rows(); ++i) {
      for (Index j = 0; j < Z.rows(); ++j) {
        K(i, j) = cfg.variance * std::exp(-0.5 * (xs.row(i) - zs.row(j)).squaredNorm());
      }
    }
  } else {
    for (Index i = 0; i < X.rows(); ++i) {
      for (Index j = 0; j < Z.rows(); ++j) {
        K(i, j) = nn_kernel(cfg, X.row(i).transpose(), Z.row(j).transpose());
      }
    }
  }
  return K;
}

Vector kernel_diagonal(const KernelConfig& cfg, const Matrix& X) {
  check_inputs(cfg, X, X);
  Vector d(X.rows());
  for (Index i = 0; i < X.rows(); ++i) {
    d(i) = cfg.family == KernelFamily::Rbf ? cfg.variance
                                           : nn_kernel(cfg, X.row(i).transpose(), X.row(i).transpose());
  }
  return d;
}

Matrix correlation_kernel(const KernelConfig& cfg, const Matrix& X, const Matrix& Z) {
  const Matrix K = kernel_matrix(cfg, X, Z);
  const Vector dx = kernel_diagonal(cfg, X).cwiseSqrt().cwiseInverse();
  const Vector dz = kernel_diagonal(cfg, Z).cwiseSqrt().cwiseInverse();
  return dx.asDiagonal() * K * dz.asDiagonal();
}

Index n_log_params(KernelFamily family, Index input_dim) {
  return 1 + input_dim + (family == KernelFamily::NeuralNet ? 2 : 0);
}

Vector to_log_params(const KernelConfig& cfg) {
  Vector out(n_log_params(cfg.family, cfg.input_dim()));
  out(0) = std::log(cfg.variance);
  out.segment(1, cfg.input_dim()) = cfg.lengthscales.array().log();
  if (cfg.family == KernelFamily::NeuralNet) {
    out(1 + cfg.input_dim()) = std::log(cfg.nn_bias_variance);
    out(2 + cfg.input_dim()) = std::log(cfg.nn_weight_variance);
  }
  return out;
}

KernelConfig from_log_params(KernelFamily family, const Vector& log_params, Index input_dim) {
  if (log_params.size() != n_log_params(family, input_dim)) {
    throw ValidationError("kernel log-parameter vector has the wrong length");
  }
  KernelConfig cfg;
  cfg.family = family;
  cfg.variance = std::exp(log_params(0));
  cfg.lengthscales = log_params.segment(1, input_dim).array().exp();
  if (family == KernelFamily::NeuralNet) {
    cfg.nn_bias_variance = std::exp(log_params(1 + input_dim));
    cfg.nn_weight_variance = std::exp(log_params(2 + input_dim));
  }
  return cfg;
}

}  // namespace skewgp
