#pragma once

#include "skewgp/kernels.hpp"
#include "skewgp/linalg.hpp"
#include "skewgp/mvn_orthant.hpp"
#include "skewgp/sun.hpp"
#include "skewgp/types.hpp"

#include <cstdint>
#include <span>
#include <vector>

namespace skewgp {

/// Largest orthant dimension evaluated on the exact paths.
inline constexpr Index kMaxExactDim = 300;

/// Skew-Gaussian process prior with zero location function. Skewness comes
/// from `s` pseudo-points R with phase signs L:
///   Gamma = L Kbar(R, R) L,  Delta(X) = Kbar(X, R) L.
struct SkewGpPrior {
  KernelConfig kernel;
  Matrix pseudo_points = Matrix(0, 1);  // s x p
  Vector phase = Vector(0);             // entries in {-1, +1}
  Vector gamma = Vector(0);

  Index latent_dim() const { return gamma.size(); }
  Index input_dim() const { return kernel.input_dim(); }
  void validate() const;

  /// s = 0: the prior is a zero-mean Gaussian process.
  static SkewGpPrior gaussian_process(KernelConfig kernel);
};

/// Binary training data; labels are 0/1.
struct TrainingSet {
  Matrix X;
  Eigen::VectorXi y;

  Index size() const { return X.rows(); }
  /// Diagonal of W, 2 y - 1.
  Vector signs() const;
  void validate() const;
  TrainingSet subset(const IndexList& rows) const;
};

struct PriorBuild {
  SunParams params;
  /// Relative white-noise term added to k(x, x) to keep the joint block
  /// matrix positive definite; 0 in the common case.
  double nugget = 0.0;
};

/// SUN_{n,s}(0, K(X,X), Kbar(X,R) L, gamma, L Kbar(R,R) L). Applies the jitter
/// policy as a relative nugget on k(x, x) when the block matrix is singular.
PriorBuild build_prior(const SkewGpPrior& prior, const Matrix& X);
SunParams build_prior_params(const SkewGpPrior& prior, const Matrix& X);

/// Probit-conjugate update of a SUN prior on f(X). `signs` holds the diagonal
/// of W; a 0 entry is the dummy label 1/2 that leaves the likelihood flat.
/// Result: SUN_{n, s+n} with
///   Delta~ = [Delta, Omega_bar D W],  gamma~ = [gamma, W xi],
///   Gamma~ = [[Gamma, Delta^T D W], [W D Delta, W Omega W + I]].
SunParams posterior_params(const SunParams& prior, const Vector& signs);

/// Posterior of f(X) with the factorizations needed for prediction.
class PosteriorModel {
 public:
  PosteriorModel(SkewGpPrior prior, TrainingSet train);

  const SkewGpPrior& prior() const { return prior_; }
  const TrainingSet& train() const { return train_; }
  const SunParams& prior_params() const { return prior_params_; }
  const SunParams& posterior() const { return posterior_; }
  double nugget() const { return nugget_; }
  const Cholesky& omega_chol() const { return omega_chol_; }
  const Cholesky& omega_bar_chol() const { return omega_bar_chol_; }
  Index n() const { return train_.size(); }
  Index latent_dim() const { return prior_.latent_dim(); }

 private:
  SkewGpPrior prior_;
  TrainingSet train_;
  SunParams prior_params_;
  SunParams posterior_;
  double nugget_ = 0.0;
  Cholesky omega_chol_;
  Cholesky omega_bar_chol_;
};

PosteriorModel posterior(const SkewGpPrior& prior, const TrainingSet& train);

struct LogEstimate {
  double log_value = 0.0;
  /// Approximate standard error of log_value from the lattice shifts.
  double std_error = 0.0;
};

/// log Phi_{s+n}(gamma~; Gamma~) - log Phi_s(gamma; Gamma). Throws
/// ValidationError when s + n exceeds kMaxExactDim.
LogEstimate log_marginal_likelihood(const PosteriorModel& model, const OrthantOptions& opts = {});

/// Disjoint blocks covering 0..n-1.
struct BatchPartition {
  std::vector<IndexList> blocks;

  Index n_blocks() const { return static_cast<Index>(blocks.size()); }
  void validate(Index n) const;

  /// Random permutation cut into contiguous blocks of `block_size` (the last
  /// one may be shorter).
  static BatchPartition random(Index n, Index block_size, std::uint64_t seed);
  static BatchPartition single(Index n);
};

/// Batched lower bound on the log marginal likelihood:
///   log(sum_i Phi_{s+|B_i|}(gamma~_{B_i}; Gamma~_{B_i}) - (b - 1)) - log Phi_s(gamma; Gamma).
/// Returns -infinity when the bracketed sum is not positive (vacuous bound).
LogEstimate log_ml_lower_bound(const PosteriorModel& model, const BatchPartition& partition,
                               const OrthantOptions& opts = {});

/// Sum over blocks of the per-block log marginal likelihoods, i.e. the log
/// marginal likelihood of a model that treats the blocks as independent.
LogEstimate log_ml_block_composite(const PosteriorModel& model, const BatchPartition& partition,
                                   const OrthantOptions& opts = {});

/// The two batched objectives computed straight from prior parameters and
/// the label signs, without building a PosteriorModel.
LogEstimate log_ml_lower_bound(const SunParams& prior_params, const Vector& signs, const BatchPartition& partition,
                               const OrthantOptions& opts = {});
LogEstimate log_ml_block_composite(const SunParams& prior_params, const Vector& signs,
                                   const BatchPartition& partition, const OrthantOptions& opts = {});

struct SampleBatch {
  Matrix f;       // n_samples x n, posterior draws of f(X)
  Matrix latent;  // n_samples x (s + n), the truncated latent draws
  std::uint64_t seed = 0;
  Index n_iterations = 0;
  Index n_accepted = 0;

  Index n_samples() const { return f.rows(); }
};

SampleBatch sample_posterior_latent(const PosteriorModel& model, Index n_samples, std::uint64_t seed,
                                    const SunSampleOptions& opts = {});

/// SUN_{1,s} law of f(x*) given one posterior draw of f(X), in the
/// parametrization that keeps the prior scale D* = sqrt(k(x*, x*)):
///   f* = xi + scale * (U0 + delta^T big_gamma^{-1} U1),
///   U0 ~ N(0, omega / scale^2 - delta^T big_gamma^{-1} delta),
///   U1 ~ N(0, big_gamma) truncated to U1 > -gamma.
struct PredictiveParams {
  double xi = 0.0;
  double omega = 0.0;
  double scale = 1.0;
  Vector delta;
  Vector gamma;
  Matrix big_gamma;

  /// The same law with the skewness vector expressed against sqrt(omega).
  SunParams to_sun() const;
};

struct LatentPrediction {
  std::vector<PredictiveParams> params;  // one per posterior draw
  Vector draws;                          // f(x*) draws, one per posterior draw
  Vector conditional_mean;               // E[f* | f(X), U1] per draw
  Vector conditional_var;                // Var[f* | f(X), U1] per draw
};

LatentPrediction predict_latent(const PosteriorModel& model, const SampleBatch& batch, const Vector& x_star,
                                std::uint64_t seed = 0);

struct ProbaResult {
  Vector proba;      // per test point
  Vector std_error;  // Monte Carlo standard error (batch means)
  Matrix f_star;     // n_samples x n_test latent draws
  Vector skewness;   // sample skewness of the draws per test point
  Vector latent_sd;  // standard deviation of the draws per test point
};

/// Monte Carlo predictive probability of y* = 1: average over posterior draws
/// of P(f* + e > 0 | draw), e ~ N(0, 1).
ProbaResult predict_proba(const PosteriorModel& model, const Matrix& X_star, const SampleBatch& batch,
                          std::uint64_t seed = 0);
ProbaResult predict_proba(const PosteriorModel& model, const Matrix& X_star, Index n_samples, std::uint64_t seed,
                          const SunSampleOptions& opts = {});

/// Ratio of orthant probabilities for the data augmented with (x*, 1).
/// Requires s + n + 1 <= kMaxExactDim.
double predict_proba_exact(const PosteriorModel& model, const Vector& x_star, const OrthantOptions& opts = {});

struct SkewnessResult {
  double value = 0.0;
  bool degenerate = false;
};

/// Standardized third central moment; 0 with the degenerate flag when the
/// draws have zero variance. Needs at least 100 draws.
SkewnessResult skewness_statistic(std::span<const double> draws);

}  // namespace skewgp
