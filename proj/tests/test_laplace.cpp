#include "doctest.h"
#include "oracles.hpp"
#include "skewgp/classifier.hpp"
#include "skewgp/errors.hpp"
#include "skewgp/laplace.hpp"

#include <cmath>
#include <random>

using namespace skewgp;

namespace {

TrainingSet random_train(Index n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd;
  TrainingSet t;
  t.X = Matrix(n, 2);
  t.y = Eigen::VectorXi(n);
  for (Index i = 0; i < n; ++i) {
    t.X(i, 0) = nd(rng);
    t.X(i, 1) = nd(rng);
    t.y(i) = nd(rng) > 0 ? 1 : 0;
  }
  return t;
}

// Plain Newton on sum log Phi(w f) - f^T K^{-1} f / 2 with an explicit inverse.
Vector dense_newton(const Matrix& K, const Vector& w) {
  const Matrix Kinv = K.inverse();
  Vector f = Vector::Zero(K.rows());
  for (int it = 0; it < 200; ++it) {
    Vector g(f.size());
    Vector h(f.size());
    for (Index i = 0; i < f.size(); ++i) {
      const double z = w(i) * f(i);
      const double r = std::exp(normal_log_pdf(z) - normal_log_cdf(z));
      g(i) = w(i) * r;
      h(i) = -r * r - z * r;
    }
    const Vector grad = g - Kinv * f;
    if (grad.norm() < 1e-13) break;
    const Matrix H = Matrix(h.asDiagonal()) - Kinv;
    f -= H.ldlt().solve(grad);
  }
  return f;
}

}  // namespace

TEST_CASE("single observation mode") {
  // Root of phi(f) / Phi(f) = f by bisection.
  double lo = 0.0;
  double hi = 1.0;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    (normal_pdf(mid) / normal_cdf(mid) > mid ? lo : hi) = mid;
  }
  TrainingSet t;
  t.X = Matrix::Zero(1, 1);
  t.y = Eigen::VectorXi::Ones(1);
  const LaplaceModel m = laplace_fit(t, KernelConfig::rbf(1.0, Vector::Ones(1)));
  CHECK(m.mode(0) == doctest::Approx(lo).epsilon(1e-9));
  CHECK(m.mode(0) == doctest::Approx(0.5061).epsilon(1e-4));
  CHECK(m.gradient_norm < 1e-8);
}

TEST_CASE("label flip negates the mode exactly") {
  const TrainingSet t = random_train(12, 1);
  TrainingSet flipped = t;
  flipped.y = 1 - t.y.array();
  const KernelConfig k = KernelConfig::rbf(1.5, Vector::Constant(2, 0.9));
  const LaplaceModel a = laplace_fit(t, k);
  const LaplaceModel b = laplace_fit(flipped, k);
  CHECK(a.mode == -b.mode);
  const Matrix Xs = Matrix::Random(4, 2);
  const Vector pa = laplace_predict_proba(a, Xs);
  const Vector pb = laplace_predict_proba(b, Xs);
  CHECK(((pa + pb).array() - 1.0).abs().maxCoeff() < 1e-12);
}

TEST_CASE("mode matches dense Newton") {
  for (int t = 0; t < 5; ++t) {
    const TrainingSet train = random_train(3, 10 + t);
    const KernelConfig k = KernelConfig::rbf(0.5 + t, Vector::Constant(2, 0.7));
    const LaplaceModel m = laplace_fit(train, k);
    const Vector ref = dense_newton(kernel_matrix(k, train.X, train.X), train.signs());
    CHECK((m.mode - ref).cwiseAbs().maxCoeff() < 1e-8);
  }
}

TEST_CASE("Newton iterations are monotone and the factor reconstructs B") {
  const TrainingSet t = random_train(40, 2);
  const KernelConfig k = KernelConfig::rbf(4.0, Vector::Constant(2, 0.5));
  const LaplaceModel m = laplace_fit(t, k);
  for (std::size_t i = 1; i < m.objective_trace.size(); ++i) CHECK(m.objective_trace[i] >= m.objective_trace[i - 1]);
  CHECK(m.gradient_norm < 1e-8);
  const Matrix K = kernel_matrix(k, t.X, t.X);
  const Matrix B = Matrix::Identity(40, 40) + m.sqrt_w.asDiagonal() * K * m.sqrt_w.asDiagonal();
  const Matrix L = m.b_chol.matrixL();
  CHECK((L * L.transpose() - B).cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("far-away points revert to one half") {
  const TrainingSet t = random_train(10, 3);
  const LaplaceModel m = laplace_fit(t, KernelConfig::rbf(1.0, Vector::Constant(2, 0.5)));
  Matrix far(1, 2);
  far << 100.0, -100.0;
  CHECK(laplace_predict_proba(m, far)(0) == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("single observation predictive matches quadrature") {
  const KernelConfig k = KernelConfig::rbf(1.0, Vector::Ones(1));
  TrainingSet t;
  t.X = Matrix::Zero(1, 1);
  t.y = Eigen::VectorXi::Ones(1);
  const LaplaceModel m = laplace_fit(t, k);
  for (double xs : {0.0, 0.5, 1.5}) {
    Matrix Xa(2, 1);
    Xa << 0.0, xs;
    oracle::SunOracle joint;
    joint.xi = Vector::Zero(2);
    joint.omega = kernel_matrix(k, Xa, Xa);
    joint.delta = Matrix(2, 0);
    joint.gamma = Vector(0);
    joint.big_gamma = Matrix(0, 0);
    const double exact = oracle::marginal_likelihood(joint, Vector::Ones(2)) / 0.5;
    CHECK(std::abs(laplace_predict_proba(m, Matrix::Constant(1, 1, xs))(0) - exact) < 2e-2);
  }
}

TEST_CASE("Laplace log marginal likelihood against the exact value") {
  int below = 0;
  for (int t = 0; t < 10; ++t) {
    const TrainingSet train = random_train(5 + t, 20 + t);
    const KernelConfig k = KernelConfig::rbf(1.0 + 0.3 * t, Vector::Constant(2, 0.8));
    const LaplaceModel lap = laplace_fit(train, k);
    const LogEstimate exact = log_marginal_likelihood(PosteriorModel(SkewGpPrior::gaussian_process(k), train));
    CHECK(std::abs(lap.log_ml - exact.log_value) > 3.0 * exact.std_error);
    if (lap.log_ml <= exact.log_value) ++below;
  }
  MESSAGE("Laplace below exact on " << below << " of 10 instances");
  CHECK(below == 10);
}

TEST_CASE("hyperparameter search improves the Laplace evidence") {
  const TrainingSet t = random_train(30, 4);
  LaplaceHyperConfig c;
  c.spsa.iterations = 60;
  c.spsa.seed = 1;
  const double start = laplace_fit(t, KernelConfig::rbf(1.0, Vector::Ones(2))).log_ml;
  const LaplaceFitResult r = laplace_fit_hyper(t, c);
  CHECK(r.model.log_ml >= start);
}

TEST_CASE("validation") {
  TrainingSet empty;
  empty.X = Matrix(0, 1);
  empty.y = Eigen::VectorXi(0);
  CHECK_THROWS_AS(laplace_fit(empty, KernelConfig::rbf(1.0, Vector::Ones(1))), ValidationError);
}
