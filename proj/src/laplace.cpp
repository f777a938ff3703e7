#include "skewgp/laplace.hpp"

#include "skewgp/errors.hpp"
#include "skewgp/normal.hpp"

#include <cmath>
#include <limits>

namespace skewgp {

namespace {

struct Likelihood {
  double log_lik = 0.0;
  Vector grad;  // d log p / d f
  Vector w;     // -d2 log p / d f2
};

// Probit likelihood Phi(y_i f_i) with y in {-1, +1}.
Likelihood probit(const Vector& f, const Vector& y) {
  Likelihood out;
  out.grad.resize(f.size());
  out.w.resize(f.size());
  for (Index i = 0; i < f.size(); ++i) {
    const double z = y(i) * f(i);
    const double log_cdf = normal_log_cdf(z);
    const double ratio = std::exp(normal_log_pdf(z) - log_cdf);  // phi(z) / Phi(z)
    out.log_lik += log_cdf;
    out.grad(i) = y(i) * ratio;
    out.w(i) = ratio * ratio + z * ratio;
  }
  return out;
}

double psi(const Vector& a, const Vector& f, const Vector& y) {
  return -0.5 * a.dot(f) + probit(f, y).log_lik;
}

}  // namespace

LaplaceModel laplace_fit(const TrainingSet& train, const KernelConfig& kernel, const LaplaceOptions& opts) {
  train.validate();
  const Index n = train.size();
  if (n < 1) throw ValidationError("laplace_fit: training set is empty");
  kernel.validate(train.X.cols());
  const Matrix K = kernel_matrix(kernel, train.X, train.X);
  const Vector y = train.signs();

  LaplaceModel m;
  m.kernel = kernel;
  m.train = train;
  Vector a = Vector::Zero(n);
  Vector f = Vector::Zero(n);
  double obj = psi(a, f, y);
  m.objective_trace.push_back(obj);

  const Matrix I = Matrix::Identity(n, n);
  for (Index it = 0; it <= opts.max_iterations; ++it) {
    const Likelihood lik = probit(f, y);
    m.gradient_norm = (lik.grad - a).norm();
    m.iterations = it;
    if (m.gradient_norm < opts.gradient_tol) break;
    if (it == opts.max_iterations) {
      throw NumericalError("laplace_fit: Newton did not converge in " + std::to_string(opts.max_iterations) +
                           " iterations (gradient norm " + std::to_string(m.gradient_norm) + ")");
    }
    const Vector sw = lik.w.cwiseSqrt();
    const Matrix B = I + sw.asDiagonal() * K * sw.asDiagonal();
    const Eigen::LLT<Matrix> L(B);
    if (L.info() != Eigen::Success) throw NumericalError("laplace_fit: B is not positive definite");
    const Vector b = lik.w.cwiseProduct(f) + lik.grad;
    const Vector a_full = b - sw.cwiseProduct(L.solve(sw.cwiseProduct(K * b)));
    // Step halving along a, keeping f = K a.
    double t = 1.0;
    Vector a_new;
    Vector f_new;
    double obj_new = -std::numeric_limits<double>::infinity();
    for (int h = 0; h < 30; ++h, t *= 0.5) {
      a_new = a + t * (a_full - a);
      f_new = K * a_new;
      obj_new = psi(a_new, f_new, y);
      if (obj_new >= obj) break;
    }
    if (!(obj_new >= obj)) {
      // No ascent at machine precision: the mode is reached up to rounding.
      break;
    }
    a = a_new;
    f = f_new;
    obj = obj_new;
    m.objective_trace.push_back(obj);
  }

  const Likelihood lik = probit(f, y);
  m.mode = f;
  m.alpha = lik.grad;
  m.sqrt_w = lik.w.cwiseSqrt();
  m.b_chol.compute(I + m.sqrt_w.asDiagonal() * K * m.sqrt_w.asDiagonal());
  if (m.b_chol.info() != Eigen::Success) throw NumericalError("laplace_fit: B is not positive definite at the mode");
  const Matrix Lb = m.b_chol.matrixL();
  m.log_ml = -0.5 * a.dot(f) + lik.log_lik - Lb.diagonal().array().log().sum();
  m.gradient_norm = (lik.grad - a).norm();
  return m;
}

LaplaceLatent laplace_predict_latent(const LaplaceModel& model, const Matrix& X_star) {
  if (X_star.cols() != model.train.X.cols()) throw ValidationError("laplace_predict: test inputs have the wrong width");
  const Matrix Ks = kernel_matrix(model.kernel, model.train.X, X_star);
  const Vector kss = kernel_diagonal(model.kernel, X_star);
  LaplaceLatent out;
  out.mean = Ks.transpose() * model.alpha;
  const Matrix V = model.b_chol.matrixL().solve(model.sqrt_w.asDiagonal() * Ks);
  out.var = (kss - V.colwise().squaredNorm().transpose()).cwiseMax(0.0);
  return out;
}

Vector laplace_predict_proba(const LaplaceModel& model, const Matrix& X_star) {
  const LaplaceLatent lat = laplace_predict_latent(model, X_star);
  Vector p(lat.mean.size());
  for (Index i = 0; i < p.size(); ++i) p(i) = normal_cdf(lat.mean(i) / std::sqrt(1.0 + lat.var(i)));
  return p;
}

LaplaceFitResult laplace_fit_hyper(const TrainingSet& train, const LaplaceHyperConfig& config) {
  const Index p = train.X.cols();
  KernelConfig k0 = config.initial_kernel ? *config.initial_kernel
                    : config.family == KernelFamily::NeuralNet
                        ? KernelConfig::neural_net(1.0, Vector::Ones(p), 1.0, 1.0)
                        : KernelConfig::rbf(1.0, Vector::Ones(p));
  auto decode = [&](const Vector& t) {
    return from_log_params(config.family, t.cwiseMax(-6.9).cwiseMin(6.9), p);
  };
  auto objective = [&](const Vector& t) {
    try {
      return laplace_fit(train, decode(t), config.newton).log_ml;
    } catch (const Error&) {
      return -std::numeric_limits<double>::infinity();
    }
  };
  const SpsaResult res = spsa_maximize(objective, to_log_params(k0), config.spsa);
  if (!std::isfinite(res.best_value)) throw NumericalError("laplace_fit_hyper: objective never finite");
  return {laplace_fit(train, decode(res.best_x), config.newton), res.trace_best};
}

}  // namespace skewgp
