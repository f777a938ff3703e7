#pragma once

#include "skewgp/linconstr_sampler.hpp"
#include "skewgp/mvn_orthant.hpp"
#include "skewgp/types.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace skewgp {

/// Parameters of a unified skew-normal SUN_{p,s}(xi, Omega, Delta, gamma, Gamma).
/// Omega = D * Omega_bar * D with D = diag(sqrt(diag(Omega))); Delta is p x s.
/// Construction never throws; call validate() for the invariants.
class SunParams {
 public:
  SunParams() = default;
  SunParams(Vector xi, Matrix omega, Matrix delta, Vector gamma, Matrix big_gamma);

  /// s = 0: a plain multivariate normal.
  static SunParams gaussian(Vector xi, Matrix omega);

  const Vector& xi() const { return xi_; }
  const Matrix& omega() const { return omega_; }
  const Matrix& delta() const { return delta_; }
  const Vector& gamma() const { return gamma_; }
  const Matrix& big_gamma() const { return big_gamma_; }
  const Matrix& omega_bar() const { return omega_bar_; }
  const Vector& d_omega() const { return d_omega_; }

  Index dim() const { return xi_.size(); }
  Index latent_dim() const { return gamma_.size(); }

  /// The (s + p) x (s + p) matrix [[Gamma, Delta^T], [Delta, Omega_bar]].
  Matrix joint_correlation() const;

 private:
  Vector xi_;
  Matrix omega_;
  Matrix delta_;
  Vector gamma_;
  Matrix big_gamma_;
  Matrix omega_bar_;
  Vector d_omega_;
};

struct SunDiagnostics {
  bool ok = true;
  std::vector<std::string> issues;
  /// Smallest eigenvalue of the joint correlation block matrix; only computed
  /// when it fails to factorize.
  double min_eigenvalue = 0.0;
};

/// Checks dimensions, finiteness, symmetry and positive definiteness of the
/// joint block matrix. Never throws.
SunDiagnostics validate(const SunParams& params);

/// Throws ValidationError carrying the diagnostics when validate() fails.
void require_valid(const SunParams& params, const std::string& what = "SUN parameters");

/// Log density; the two Gaussian CDFs are evaluated in log domain with the
/// given orthant options (same seed for numerator and denominator).
double log_pdf(const SunParams& params, const Vector& z, const OrthantOptions& opts = {});

/// Reusable density evaluator holding the factorizations of one parameter set.
class SunDensity {
 public:
  explicit SunDensity(SunParams params, OrthantOptions opts = {});
  double log_pdf(const Vector& z) const;
  const SunParams& params() const { return params_; }

 private:
  SunParams params_;
  OrthantOptions opts_;
  Eigen::LLT<Matrix> omega_llt_;
  Matrix skew_proj_;  // Omega_bar^{-1} Delta, p x s
  Matrix cond_cov_;   // Gamma - Delta^T Omega_bar^{-1} Delta
  double log_norm_ = 0.0;
  bool gaussian_ = true;
};

SunParams marginalize(const SunParams& params, const IndexList& keep);

/// Distribution of the unobserved coordinates given z[observed] = values.
/// The returned skewness matrix is expressed against the conditional scale,
/// so the result satisfies the same invariants as its input.
SunParams condition(const SunParams& params, const IndexList& observed, const Vector& values);

/// Law of c + A z for a full-row-rank A (q x p).
SunParams affine(const SunParams& params, const Vector& c, const Matrix& A);

struct SunSampleOptions {
  SamplerOptions chain;
  /// Latent coordinates with gamma_i above this are treated as untruncated.
  double inactive_gamma = 8.0;
};

struct SunSample {
  Matrix z;       // n x p
  Matrix latent;  // n x s, the truncated latent draws U1
  Index n_iterations = 0;
  Index n_accepted = 0;
};

/// Additive representation z = xi + D (U0 + Delta Gamma^{-1} U1) with
/// U0 ~ N(0, Omega_bar - Delta Gamma^{-1} Delta^T) and U1 ~ N(0, Gamma)
/// truncated to U1 > -gamma (drawn by lin-ess).
SunSample sample(const SunParams& params, Index n, std::uint64_t seed, const SunSampleOptions& opts = {});

}  // namespace skewgp
