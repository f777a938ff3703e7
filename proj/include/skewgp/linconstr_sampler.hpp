#pragma once

#include "skewgp/normal.hpp"
#include "skewgp/types.hpp"

#include <cstdint>
#include <vector>

namespace skewgp {

/// Feasible set {u : A u + b > 0}.
struct LinearConstraints {
  Matrix A;
  Vector b;

  Index size() const { return A.rows(); }
  Index dim() const { return A.cols(); }

  Vector slack(const Vector& u) const { return A * u + b; }
  IndexList violated(const Vector& u) const;

  /// u_i > -lower_shift_i for every coordinate (A = I, b = lower_shift).
  static LinearConstraints componentwise(const Vector& lower_shift);
};

/// Half-open angular interval [lo, hi) inside [0, 2pi).
struct Arc {
  double lo;
  double hi;
};

/// Angles theta in [0, 2pi) for which x cos(theta) + nu sin(theta) is feasible,
/// as a sorted list of disjoint arcs. theta = 0 is always inside when x is
/// feasible. Tangent crossings count as feasible.
std::vector<Arc> active_arcs(const Vector& x, const Vector& nu, const LinearConstraints& constraints);

/// Strictly feasible point obtained by shifting along violated constraint
/// normals, starting from the origin (the mode of the untruncated target).
Vector feasible_start(const LinearConstraints& constraints, double margin = 1e-6);

/// One lin-ess Markov chain targeting N(0, L L^T) restricted to the constraints.
class LinEssChain {
 public:
  LinEssChain(Matrix cov_chol, LinearConstraints constraints, Vector x0, std::uint64_t seed);

  const Vector& step();

  const Vector& current() const { return current_; }
  Index n_iterations() const { return n_iterations_; }
  Index n_accepted() const { return n_accepted_; }
  const Matrix& cov_chol() const { return cov_chol_; }

 private:
  Vector current_;
  Matrix cov_chol_;
  LinearConstraints constraints_;
  Rng rng_;
  Index n_iterations_ = 0;
  Index n_accepted_ = 0;
};

struct SamplerOptions {
  Index burn_in = 0;
  Index thin = 1;
  /// Chains longer than this are split into independent chains with
  /// distinct sub-seeds, each restarted from x0.
  Index chain_length = 1000;
};

struct SampleResult {
  Matrix samples;  // n_samples x d
  Index n_iterations = 0;
  Index n_accepted = 0;
  Index n_chains = 0;
  Index n_likelihood_evals = 0;  // ess only
};

/// Draws from N(0, cov) restricted to the constraints by linear elliptical
/// slice sampling. Draws are Markov-chain samples, not independent.
SampleResult sample_truncated(const Matrix& cov, const LinearConstraints& constraints, const Vector& x0,
                              Index n_samples, std::uint64_t seed, const SamplerOptions& opts = {});

/// Same as sample_truncated with a precomputed lower Cholesky factor.
SampleResult sample_truncated_chol(const Matrix& cov_chol, const LinearConstraints& constraints,
                                   const Vector& x0, Index n_samples, std::uint64_t seed,
                                   const SamplerOptions& opts = {});

struct EssOptions {
  Index burn_in = 5000;
  Index thin = 1;
  double sharpness = 80.0;  // logistic slope replacing the hard indicator
};

/// Plain elliptical slice sampling with the truncation indicator replaced by
/// prod_i sigmoid(sharpness * (A u + b)_i). Baseline for lin-ess.
SampleResult sample_truncated_ess(const Matrix& cov, const LinearConstraints& constraints, const Vector& x0,
                                  Index n_samples, std::uint64_t seed, const EssOptions& opts = {});

/// Effective sample size of a scalar chain (Geyer initial positive sequence).
double effective_sample_size(const Vector& chain);

}  // namespace skewgp
