#pragma once

#include "skewgp/classifier.hpp"
#include "skewgp/kernels.hpp"
#include "skewgp/spsa.hpp"

#include <optional>
#include <vector>

namespace skewgp {

struct LaplaceOptions {
  Index max_iterations = 100;
  double gradient_tol = 1e-8;
};

/// Gaussian approximation at the mode of the probit GP posterior.
struct LaplaceModel {
  KernelConfig kernel;
  TrainingSet train;
  Vector mode;           // f-hat
  Vector alpha;          // K^{-1} f-hat, equal to the likelihood gradient at the mode
  Vector sqrt_w;         // W^{1/2} at the mode
  Eigen::LLT<Matrix> b_chol;  // B = I + W^{1/2} K W^{1/2}
  double log_ml = 0.0;   // Laplace approximation of the log marginal likelihood
  double gradient_norm = 0.0;
  Index iterations = 0;
  std::vector<double> objective_trace;  // log posterior (unnormalized) per Newton step
};

/// Newton iterations on log p(y | f) - f^T K^{-1} f / 2 in the
/// B = I + W^{1/2} K W^{1/2} form, with step halving. Throws NumericalError
/// when the gradient does not reach the tolerance.
LaplaceModel laplace_fit(const TrainingSet& train, const KernelConfig& kernel, const LaplaceOptions& opts = {});

/// Phi(mu* / sqrt(1 + var*)) per test row.
Vector laplace_predict_proba(const LaplaceModel& model, const Matrix& X_star);

/// Predictive latent mean and variance per test row.
struct LaplaceLatent {
  Vector mean;
  Vector var;
};
LaplaceLatent laplace_predict_latent(const LaplaceModel& model, const Matrix& X_star);

struct LaplaceHyperConfig {
  KernelFamily family = KernelFamily::Rbf;
  SpsaOptions spsa;
  LaplaceOptions newton;
  std::optional<KernelConfig> initial_kernel;
};

struct LaplaceFitResult {
  LaplaceModel model;
  std::vector<double> trace_best;
};

/// Kernel hyperparameters chosen by maximizing the Laplace log marginal
/// likelihood with SPSA in log space.
LaplaceFitResult laplace_fit_hyper(const TrainingSet& train, const LaplaceHyperConfig& config);

}  // namespace skewgp
