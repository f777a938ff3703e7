// Small random classification problems shared by the classifier tests and
// the acceptance checks.
#pragma once

#include "oracles.hpp"
#include "skewgp/classifier.hpp"

#include <initializer_list>
#include <random>

namespace problems {

using namespace skewgp;

inline TrainingSet make_train(const Matrix& X, std::initializer_list<int> labels) {
  TrainingSet t;
  t.X = X;
  t.y.resize(static_cast<Index>(labels.size()));
  Index i = 0;
  for (int l : labels) t.y(i++) = l;
  return t;
}

inline Matrix column(std::initializer_list<double> v) {
  Matrix m(static_cast<Index>(v.size()), 1);
  Index i = 0;
  for (double x : v) m(i++, 0) = x;
  return m;
}

inline SkewGpPrior skew_prior(const KernelConfig& k, const Matrix& R, const Vector& phase, const Vector& gamma) {
  SkewGpPrior p;
  p.kernel = k;
  p.pseudo_points = R;
  p.phase = phase;
  p.gamma = gamma;
  return p;
}

// Random 1-D problem with n points and s in {0, 2}.
struct Problem {
  SkewGpPrior prior;
  TrainingSet train;
};

inline Problem random_problem(Index n, Index s, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd;
  std::uniform_real_distribution<double> unif(0.4, 1.5);
  Problem pb;
  pb.prior.kernel = KernelConfig::rbf(unif(rng), Vector::Constant(1, unif(rng)));
  pb.prior.pseudo_points = Matrix(s, 1);
  pb.prior.phase = Vector(s);
  pb.prior.gamma = Vector(s);
  for (Index i = 0; i < s; ++i) {
    pb.prior.pseudo_points(i, 0) = nd(rng);
    pb.prior.phase(i) = nd(rng) > 0 ? 1.0 : -1.0;
    pb.prior.gamma(i) = 0.7 * nd(rng);
  }
  pb.train.X = Matrix(n, 1);
  pb.train.y = Eigen::VectorXi(n);
  for (Index i = 0; i < n; ++i) {
    pb.train.X(i, 0) = 1.5 * nd(rng);
    pb.train.y(i) = nd(rng) > 0 ? 1 : 0;
  }
  return pb;
}

inline oracle::SunOracle prior_oracle(const SkewGpPrior& prior, const Matrix& X) {
  // Built directly from the kernel, independent of build_prior_params.
  oracle::SunOracle o;
  const Index n = X.rows();
  const Index s = prior.latent_dim();
  o.xi = Vector::Zero(n);
  o.omega = kernel_matrix(prior.kernel, X, X);
  o.delta = Matrix(n, s);
  o.big_gamma = Matrix(s, s);
  o.gamma = prior.gamma;
  const double var = prior.kernel.variance;
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < s; ++j)
      o.delta(i, j) = kernel_matrix(prior.kernel, X.row(i), prior.pseudo_points.row(j))(0, 0) / var * prior.phase(j);
  for (Index i = 0; i < s; ++i)
    for (Index j = 0; j < s; ++j)
      o.big_gamma(i, j) = kernel_matrix(prior.kernel, prior.pseudo_points.row(i), prior.pseudo_points.row(j))(0, 0) /
                          var * prior.phase(i) * prior.phase(j);
  return o;
}

}  // namespace problems
