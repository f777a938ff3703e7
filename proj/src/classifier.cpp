#include "skewgp/classifier.hpp"

#include "skewgp/errors.hpp"
#include "skewgp/normal.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace skewgp {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// Kernel pieces for a set of inputs against the pseudo-points, with the
// relative nugget applied to k(x, x).
struct PriorPieces {
  Matrix K;        // K(X, X) including the nugget on the diagonal
  Vector scale;    // sqrt of the diagonal
  Matrix delta;    // Kbar(X, R) L
  Matrix big_gamma;
};

Matrix cross_correlation(const SkewGpPrior& prior, const Matrix& X, const Vector& x_scale) {
  const Index s = prior.latent_dim();
  if (s == 0) return Matrix(X.rows(), 0);
  const Matrix kxr = kernel_matrix(prior.kernel, X, prior.pseudo_points);
  const Vector r_scale = kernel_diagonal(prior.kernel, prior.pseudo_points).cwiseSqrt();
  return x_scale.cwiseInverse().asDiagonal() * kxr * r_scale.cwiseInverse().asDiagonal() *
         prior.phase.asDiagonal();
}

Matrix latent_gamma(const SkewGpPrior& prior) {
  const Index s = prior.latent_dim();
  if (s == 0) return Matrix(0, 0);
  Matrix g = prior.phase.asDiagonal() * correlation_kernel(prior.kernel, prior.pseudo_points, prior.pseudo_points) *
             prior.phase.asDiagonal();
  g.diagonal().setOnes();
  symmetrize(g);
  return g;
}

// Smallest squared Cholesky pivot of the unit-diagonal joint block accepted
// without a nugget.
constexpr double kMinPivot = 5e-11;

SunParams assemble(const SkewGpPrior& prior, const Matrix& X, const Matrix& K_raw, double nugget) {
  Matrix K = K_raw;
  K.diagonal() *= (1.0 + nugget);
  const Vector scale = K.diagonal().cwiseSqrt();
  return SunParams(Vector::Zero(X.rows()), K, cross_correlation(prior, X, scale), prior.gamma, latent_gamma(prior));
}

double batch_means_se(const Vector& values) {
  const Index n = values.size();
  if (n < 2) return 0.0;
  const Index n_batches = std::min<Index>(20, n);
  const Index len = n / n_batches;
  Vector means(n_batches);
  for (Index b = 0; b < n_batches; ++b) means(b) = values.segment(b * len, len).mean();
  const double mu = means.mean();
  const double var = (means.array() - mu).square().sum() / (n_batches - 1);
  return std::sqrt(var / n_batches);
}

}  // namespace

void SkewGpPrior::validate() const {
  kernel.validate();
  const Index s = latent_dim();
  if (phase.size() != s) throw ValidationError("prior: phase must have length s");
  if (s > 0 && (pseudo_points.rows() != s || pseudo_points.cols() != kernel.input_dim())) {
    throw ValidationError("prior: pseudo-points must be s x p");
  }
  if (!pseudo_points.allFinite() || !gamma.allFinite()) throw ValidationError("prior: non-finite parameters");
  for (Index i = 0; i < s; ++i) {
    if (phase(i) != 1.0 && phase(i) != -1.0) throw ValidationError("prior: phase entries must be +1 or -1");
  }
}

SkewGpPrior SkewGpPrior::gaussian_process(KernelConfig kernel) {
  SkewGpPrior prior;
  prior.pseudo_points = Matrix(0, kernel.input_dim());
  prior.kernel = std::move(kernel);
  return prior;
}

Vector TrainingSet::signs() const {
  return (2 * y.array() - 1).cast<double>();
}

void TrainingSet::validate() const {
  if (X.rows() != y.size()) throw ValidationError("training set: X rows and label count differ");
  require_finite(X, "training inputs");
  for (Index i = 0; i < y.size(); ++i) {
    if (y(i) != 0 && y(i) != 1) throw ValidationError("training set: labels must be 0 or 1");
  }
}

TrainingSet TrainingSet::subset(const IndexList& rows) const {
  TrainingSet out;
  out.X = select_rows(X, rows);
  out.y.resize(static_cast<Index>(rows.size()));
  for (Index i = 0; i < out.y.size(); ++i) out.y(i) = y(rows[i]);
  return out;
}

PriorBuild build_prior(const SkewGpPrior& prior, const Matrix& X) {
  prior.validate();
  if (X.cols() != prior.input_dim()) throw ValidationError("build_prior: input dimension mismatch");
  require_finite(X, "inputs");
  const Matrix K = kernel_matrix(prior.kernel, X, X);
  PriorBuild out{assemble(prior, X, K, 0.0), 0.0};
  if (X.rows() == 0) return out;
  // A factorization that succeeds only at round-off level is treated as
  // singular too; the posterior built from it would not factor.
  Eigen::LLT<Matrix> llt;
  auto usable = [&llt](const Matrix& m) {
    llt.compute(m);
    return llt.info() == Eigen::Success && llt.matrixLLT().diagonal().array().square().minCoeff() > kMinPivot;
  };
  if (usable(out.params.joint_correlation())) return out;
  for (double eps = 1e-10; eps <= 1e-6 * (1.0 + 1e-12); eps *= 2.0) {
    out.params = assemble(prior, X, K, eps);
    out.nugget = eps;
    if (usable(out.params.joint_correlation())) return out;
  }
  const long minor = failing_leading_minor(out.params.joint_correlation());
  throw FactorizationError("build_prior: skewness block matrix singular beyond jitter (coincident pseudo-point and "
                           "training input?), leading minor " + std::to_string(minor),
                           minor);
}

SunParams build_prior_params(const SkewGpPrior& prior, const Matrix& X) {
  return build_prior(prior, X).params;
}

SunParams posterior_params(const SunParams& prior, const Vector& signs) {
  const Index n = prior.dim();
  const Index s = prior.latent_dim();
  if (signs.size() != n) throw ValidationError("posterior: sign vector length must equal n");
  const auto W = signs.asDiagonal();
  const auto D = prior.d_omega().asDiagonal();

  Matrix delta(n, s + n);
  delta.leftCols(s) = prior.delta();
  delta.rightCols(n) = prior.omega_bar() * D * W;

  Vector gamma(s + n);
  gamma.head(s) = prior.gamma();
  gamma.tail(n) = W * prior.xi();

  Matrix big_gamma(s + n, s + n);
  big_gamma.topLeftCorner(s, s) = prior.big_gamma();
  big_gamma.topRightCorner(s, n) = prior.delta().transpose() * D * W;
  big_gamma.bottomLeftCorner(n, s) = big_gamma.topRightCorner(s, n).transpose();
  big_gamma.bottomRightCorner(n, n) = W * prior.omega() * W;
  big_gamma.bottomRightCorner(n, n).diagonal().array() += 1.0;
  symmetrize(big_gamma);
  return SunParams(prior.xi(), prior.omega(), delta, gamma, big_gamma);
}

PosteriorModel::PosteriorModel(SkewGpPrior prior, TrainingSet train) : prior_(std::move(prior)), train_(std::move(train)) {
  train_.validate();
  const PriorBuild built = build_prior(prior_, train_.X);
  prior_params_ = built.params;
  nugget_ = built.nugget;
  posterior_ = posterior_params(prior_params_, train_.signs());
  omega_chol_ = jittered_cholesky(prior_params_.omega(), "K(X, X)");
  omega_bar_chol_ = jittered_cholesky(prior_params_.omega_bar(), "Kbar(X, X)");
}

PosteriorModel posterior(const SkewGpPrior& prior, const TrainingSet& train) {
  return PosteriorModel(prior, train);
}

LogEstimate log_marginal_likelihood(const PosteriorModel& model, const OrthantOptions& opts) {
  const SunParams& post = model.posterior();
  if (post.latent_dim() > kMaxExactDim) {
    throw ValidationError("log_marginal_likelihood: s + n = " + std::to_string(post.latent_dim()) +
                          " exceeds the exact-path limit; use log_ml_lower_bound with a batch partition");
  }
  const CdfEstimate num = orthant_probability(post.gamma(), post.big_gamma(), opts);
  const CdfEstimate den = orthant_probability(model.prior_params().gamma(), model.prior_params().big_gamma(), opts);
  return {num.log_value - den.log_value, std::hypot(num.relative_error, den.relative_error)};
}

void BatchPartition::validate(Index n) const {
  std::vector<int> seen(static_cast<std::size_t>(n), 0);
  for (const auto& block : blocks) {
    if (block.empty()) throw ValidationError("partition: empty block");
    for (Index i : block) {
      if (i < 0 || i >= n) throw ValidationError("partition: index out of range");
      if (seen[static_cast<std::size_t>(i)]++) throw ValidationError("partition: blocks overlap");
    }
  }
  for (int c : seen) {
    if (c == 0) throw ValidationError("partition: blocks do not cover every observation");
  }
}

BatchPartition BatchPartition::random(Index n, Index block_size, std::uint64_t seed) {
  if (block_size < 1) throw ValidationError("partition: block size must be positive");
  IndexList perm(static_cast<std::size_t>(n));
  std::iota(perm.begin(), perm.end(), Index{0});
  Rng rng(seed);
  std::shuffle(perm.begin(), perm.end(), rng);
  BatchPartition out;
  for (Index start = 0; start < n; start += block_size) {
    const Index end = std::min(n, start + block_size);
    out.blocks.emplace_back(perm.begin() + start, perm.begin() + end);
  }
  return out;
}

BatchPartition BatchPartition::single(Index n) {
  BatchPartition out;
  IndexList all(static_cast<std::size_t>(n));
  std::iota(all.begin(), all.end(), Index{0});
  out.blocks.push_back(std::move(all));
  return out;
}

namespace {

struct BlockTerms {
  std::vector<CdfEstimate> blocks;
  CdfEstimate prior_norm;
};

BlockTerms block_terms(const SunParams& prior_params, const Vector& signs, const BatchPartition& partition,
                       const OrthantOptions& opts) {
  partition.validate(prior_params.dim());
  if (signs.size() != prior_params.dim()) throw ValidationError("batch bound: sign vector length must equal n");
  BlockTerms out;
  for (std::size_t b = 0; b < partition.blocks.size(); ++b) {
    const IndexList& block = partition.blocks[b];
    if (prior_params.latent_dim() + static_cast<Index>(block.size()) > kMaxExactDim) {
      throw ValidationError("batch of size " + std::to_string(block.size()) + " exceeds the exact-path limit");
    }
    const SunParams post = posterior_params(marginalize(prior_params, block), select(signs, block));
    OrthantOptions o = opts;
    // The first block keeps the base seed so one block reproduces the exact value.
    if (b > 0) o.seed = sub_seed(opts.seed, b);
    out.blocks.push_back(orthant_probability(post.gamma(), post.big_gamma(), o));
  }
  out.prior_norm = orthant_probability(prior_params.gamma(), prior_params.big_gamma(), opts);
  return out;
}

}  // namespace

LogEstimate log_ml_lower_bound(const SunParams& prior_params, const Vector& signs, const BatchPartition& partition,
                               const OrthantOptions& opts) {
  const BlockTerms t = block_terms(prior_params, signs, partition, opts);
  double sum = 0.0;
  double var = 0.0;
  for (const auto& e : t.blocks) {
    sum += e.value;
    var += e.std_error * e.std_error;
  }
  const double fre = sum - static_cast<double>(t.blocks.size() - 1);
  if (!(fre > 0.0)) return {kNegInf, 0.0};
  return {std::log(fre) - t.prior_norm.log_value, std::hypot(std::sqrt(var) / fre, t.prior_norm.relative_error)};
}

LogEstimate log_ml_block_composite(const SunParams& prior_params, const Vector& signs,
                                   const BatchPartition& partition, const OrthantOptions& opts) {
  const BlockTerms t = block_terms(prior_params, signs, partition, opts);
  LogEstimate out;
  double var = 0.0;
  for (const auto& e : t.blocks) {
    out.log_value += e.log_value - t.prior_norm.log_value;
    var += e.relative_error * e.relative_error + t.prior_norm.relative_error * t.prior_norm.relative_error;
  }
  out.std_error = std::sqrt(var);
  return out;
}

LogEstimate log_ml_lower_bound(const PosteriorModel& model, const BatchPartition& partition,
                               const OrthantOptions& opts) {
  return log_ml_lower_bound(model.prior_params(), model.train().signs(), partition, opts);
}

LogEstimate log_ml_block_composite(const PosteriorModel& model, const BatchPartition& partition,
                                   const OrthantOptions& opts) {
  return log_ml_block_composite(model.prior_params(), model.train().signs(), partition, opts);
}

SampleBatch sample_posterior_latent(const PosteriorModel& model, Index n_samples, std::uint64_t seed,
                                    const SunSampleOptions& opts) {
  const SunSample draws = sample(model.posterior(), n_samples, seed, opts);
  SampleBatch out;
  out.f = draws.z;
  out.latent = draws.latent;
  out.seed = seed;
  out.n_iterations = draws.n_iterations;
  out.n_accepted = draws.n_accepted;
  return out;
}

SunParams PredictiveParams::to_sun() const {
  const double sd = std::sqrt(std::max(omega, 0.0));
  Matrix d(1, delta.size());
  d.row(0) = (delta * (sd > 0.0 ? scale / sd : 0.0)).transpose();
  return SunParams(Vector::Constant(1, xi), Matrix::Constant(1, 1, omega), d, gamma, big_gamma);
}

namespace {

// Test-point quantities that do not depend on the posterior draw.
struct TestPoint {
  Vector weights;     // K(X,X)^{-1} k(X, x*)
  double omega = 0.0; // conditional variance
  double scale = 1.0; // sqrt(k(x*, x*))
  Vector delta;       // Delta*
  Vector skew_gain;   // Gamma*^{-1} Delta*
  double resid_var = 0.0;  // Var(U0) in scaled units
};

struct SharedPredictive {
  Matrix gain;       // Omega_bar^{-1} Delta, n x s
  Matrix big_gamma;  // Gamma*
  Cholesky big_gamma_chol;
};

SharedPredictive shared_predictive(const PosteriorModel& model) {
  SharedPredictive sp;
  const Index s = model.latent_dim();
  sp.gain = model.omega_bar_chol().solve(model.prior_params().delta());
  sp.big_gamma = model.prior_params().big_gamma() - model.prior_params().delta().transpose() * sp.gain;
  symmetrize(sp.big_gamma);
  if (s > 0) sp.big_gamma_chol = jittered_cholesky(sp.big_gamma, "Gamma*");
  return sp;
}

TestPoint test_point(const PosteriorModel& model, const SharedPredictive& sp, const Vector& x_star) {
  const SkewGpPrior& prior = model.prior();
  if (x_star.size() != prior.input_dim()) throw ValidationError("predict: test point has the wrong dimension");
  const Matrix xs = x_star.transpose();
  TestPoint tp;
  const double kss = kernel_diagonal(prior.kernel, xs)(0) * (1.0 + model.nugget());
  tp.scale = std::sqrt(kss);
  const Vector k = kernel_matrix(prior.kernel, model.train().X, xs).col(0);
  tp.weights = model.omega_chol().solve(k);
  tp.omega = kss - k.dot(tp.weights);
  if (tp.omega < -1e-6 * kss) {
    throw NumericalError("predict: negative predictive variance " + std::to_string(tp.omega));
  }
  tp.omega = std::max(tp.omega, 0.0);
  const Index s = model.latent_dim();
  tp.delta = Vector::Zero(s);
  tp.skew_gain = Vector::Zero(s);
  tp.resid_var = tp.omega / kss;
  if (s > 0) {
    const Vector kbar = k.cwiseQuotient(model.prior_params().d_omega()) / tp.scale;
    const Vector delta_star = cross_correlation(prior, xs, Vector::Constant(1, tp.scale)).row(0).transpose();
    tp.delta = delta_star - sp.gain.transpose() * kbar;
    tp.skew_gain = sp.big_gamma_chol.solve(tp.delta);
    tp.resid_var = std::max(tp.omega / kss - tp.delta.dot(tp.skew_gain), 0.0);
  }
  return tp;
}

}  // namespace

LatentPrediction predict_latent(const PosteriorModel& model, const SampleBatch& batch, const Vector& x_star,
                                std::uint64_t seed) {
  const Index s = model.latent_dim();
  const Index n = model.n();
  if (batch.f.cols() != n || batch.latent.cols() != s + n) {
    throw ValidationError("predict_latent: sample batch does not match the model");
  }
  const SharedPredictive sp = shared_predictive(model);
  const TestPoint tp = test_point(model, sp, x_star);
  const Index m = batch.n_samples();

  LatentPrediction out;
  out.params.reserve(static_cast<std::size_t>(m));
  out.draws.resize(m);
  out.conditional_mean.resize(m);
  out.conditional_var.resize(m);
  Rng rng(sub_seed(seed, 0x7e57));
  std::normal_distribution<double> normal;
  for (Index i = 0; i < m; ++i) {
    const Vector f = batch.f.row(i).transpose();
    const Vector y = f.cwiseQuotient(model.prior_params().d_omega());
    PredictiveParams pp;
    pp.xi = tp.weights.dot(f);
    pp.omega = tp.omega;
    pp.scale = tp.scale;
    pp.delta = tp.delta;
    pp.gamma = model.prior().gamma + sp.gain.transpose() * y;
    pp.big_gamma = sp.big_gamma;
    double mean = pp.xi;
    if (s > 0) {
      const Vector u1 = batch.latent.row(i).head(s).transpose() - sp.gain.transpose() * y;
      mean += tp.scale * tp.skew_gain.dot(u1);
    }
    const double var = tp.scale * tp.scale * tp.resid_var;
    out.conditional_mean(i) = mean;
    out.conditional_var(i) = var;
    out.draws(i) = mean + std::sqrt(var) * normal(rng);
    out.params.push_back(std::move(pp));
  }
  return out;
}

ProbaResult predict_proba(const PosteriorModel& model, const Matrix& X_star, const SampleBatch& batch,
                          std::uint64_t seed) {
  const Index s = model.latent_dim();
  const Index n = model.n();
  if (X_star.cols() != model.prior().input_dim()) throw ValidationError("predict: test inputs have the wrong width");
  if (batch.f.cols() != n || batch.latent.cols() != s + n) {
    throw ValidationError("predict: sample batch does not match the model");
  }
  const SharedPredictive sp = shared_predictive(model);
  const Index m = batch.n_samples();
  const Index t = X_star.rows();

  // Per-draw pieces shared by every test point.
  const Matrix Y = batch.f * model.prior_params().d_omega().cwiseInverse().asDiagonal();
  Matrix U1(m, s);
  if (s > 0) U1 = batch.latent.leftCols(s) - Y * sp.gain;

  ProbaResult out;
  out.proba.resize(t);
  out.std_error.resize(t);
  out.f_star.resize(m, t);
  out.skewness.resize(t);
  out.latent_sd.resize(t);
  Rng rng(sub_seed(seed, 0x7e57));
  std::normal_distribution<double> normal;
  for (Index j = 0; j < t; ++j) {
    const TestPoint tp = test_point(model, sp, X_star.row(j).transpose());
    Vector mean = batch.f * tp.weights;
    if (s > 0) mean += tp.scale * (U1 * tp.skew_gain);
    const double var = tp.scale * tp.scale * tp.resid_var;
    const double denom = std::sqrt(1.0 + var);
    Vector p(m);
    for (Index i = 0; i < m; ++i) {
      p(i) = normal_cdf(mean(i) / denom);
      out.f_star(i, j) = mean(i) + std::sqrt(var) * normal(rng);
    }
    out.proba(j) = m > 0 ? p.mean() : 0.5;
    out.std_error(j) = batch_means_se(p);
    const Vector col = out.f_star.col(j);
    out.latent_sd(j) = m > 1 ? std::sqrt((col.array() - col.mean()).square().sum() / (m - 1)) : 0.0;
    out.skewness(j) = m >= 100 ? skewness_statistic(std::span<const double>(col.data(), col.size())).value : 0.0;
  }
  return out;
}

ProbaResult predict_proba(const PosteriorModel& model, const Matrix& X_star, Index n_samples, std::uint64_t seed,
                          const SunSampleOptions& opts) {
  if (model.n() == 0) {
    // No data: the predictive is the prior one, computed from prior draws.
    SampleBatch empty;
    empty.f = Matrix(n_samples, 0);
    const SunSample prior_draws = sample(model.prior_params(), n_samples, sub_seed(seed, 1), opts);
    empty.latent = prior_draws.latent;
    return predict_proba(model, X_star, empty, sub_seed(seed, 2));
  }
  const SampleBatch batch = sample_posterior_latent(model, n_samples, sub_seed(seed, 1), opts);
  return predict_proba(model, X_star, batch, sub_seed(seed, 2));
}

double predict_proba_exact(const PosteriorModel& model, const Vector& x_star, const OrthantOptions& opts) {
  const Index n = model.n();
  const Index s = model.latent_dim();
  if (s + n + 1 > kMaxExactDim) {
    throw ValidationError("predict_proba_exact: s + n + 1 exceeds the exact-path limit; use predict_proba");
  }
  if (x_star.size() != model.prior().input_dim()) throw ValidationError("predict: test point has the wrong dimension");
  Matrix X_aug(n + 1, model.prior().input_dim());
  X_aug.topRows(n) = model.train().X;
  X_aug.row(n) = x_star.transpose();
  Vector signs(n + 1);
  signs.head(n) = model.train().signs();
  signs(n) = 1.0;
  const SunParams aug = posterior_params(build_prior_params(model.prior(), X_aug), signs);
  const CdfEstimate num = orthant_probability(aug.gamma(), aug.big_gamma(), opts);
  const CdfEstimate den = orthant_probability(model.posterior().gamma(), model.posterior().big_gamma(), opts);
  return std::exp(num.log_value - den.log_value);
}

SkewnessResult skewness_statistic(std::span<const double> draws) {
  if (draws.size() < 100) throw ValidationError("skewness_statistic: needs at least 100 draws");
  const double n = static_cast<double>(draws.size());
  const double mu = std::accumulate(draws.begin(), draws.end(), 0.0) / n;
  double m2 = 0.0;
  double m3 = 0.0;
  for (double x : draws) {
    const double d = x - mu;
    m2 += d * d;
    m3 += d * d * d;
  }
  m2 /= n;
  m3 /= n;
  if (!(m2 > 1e-300) || m2 <= 1e-24 * std::max(1.0, mu * mu)) return {0.0, true};
  return {m3 / std::pow(m2, 1.5), false};
}

}  // namespace skewgp
