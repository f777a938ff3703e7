#include "skewgp/errors.hpp"
#include "skewgp/harness.hpp"
#include "skewgp/linalg.hpp"
#include "skewgp/normal.hpp"

#include <cstdio>
#include <ostream>
#include <random>

namespace skewgp {

Dataset generate_synthetic(const SyntheticConfig& config) {
  if (config.n < 2) throw ValidationError("synthetic data: need at least two points");
  if (config.dim < 1) throw ValidationError("synthetic data: dimension must be positive");
  KernelConfig kernel = config.kernel;
  if (kernel.lengthscales.size() == 1 && config.dim > 1) {
    kernel.lengthscales = Vector::Constant(config.dim, kernel.lengthscales(0));
  }
  kernel.validate(config.dim);

  Rng rng(config.seed);
  Matrix X = standard_normal(rng, config.n * config.dim).reshaped(config.n, config.dim);
  const Cholesky chol = jittered_cholesky(kernel_matrix(kernel, X, X), "synthetic K");
  const Vector f = chol.lower() * standard_normal(rng, config.n);
  std::uniform_real_distribution<double> unif;
  Eigen::VectorXi y(config.n);
  for (Index i = 0; i < config.n; ++i) y(i) = unif(rng) < normal_cdf(f(i)) ? 1 : 0;

  std::vector<std::string> names;
  for (Index j = 0; j < config.dim; ++j) names.push_back("x" + std::to_string(j + 1));
  Dataset d = make_dataset("synthetic-" + std::to_string(config.seed), std::move(names), std::move(X), std::move(y));
  d.latent = f;
  return d;
}

PriorDraws sample_prior_draws(const SkewGpPrior& prior, const Vector& grid, Index n_draws, std::uint64_t seed) {
  if (n_draws < 1) throw ValidationError("prior draws: need at least one draw");
  if (grid.size() < 1) throw ValidationError("prior draws: empty grid");
  if (prior.input_dim() != 1) throw ValidationError("prior draws: the grid is one-dimensional");
  const Matrix X = grid;
  const SunSample s = sample(build_prior_params(prior, X), n_draws, seed);
  PriorDraws out;
  out.grid = grid;
  out.f = s.z;
  out.phi = out.f.unaryExpr([](double v) { return normal_cdf(v); });
  out.mean_phi = out.phi.colwise().mean().transpose();
  return out;
}

void write_prior_csv(const PriorDraws& draws, std::ostream& out) {
  const Index d = draws.f.rows();
  out << "x,mean_phi";
  for (Index k = 0; k < d; ++k) out << ",f" << k + 1;
  for (Index k = 0; k < d; ++k) out << ",phi" << k + 1;
  out << '\n';
  char buf[32];
  auto put = [&](double v) {
    std::snprintf(buf, sizeof buf, "%.17g", v);
    out << buf;
  };
  for (Index g = 0; g < draws.grid.size(); ++g) {
    put(draws.grid(g));
    out << ',';
    put(draws.mean_phi(g));
    for (Index k = 0; k < d; ++k) {
      out << ',';
      put(draws.f(k, g));
    }
    for (Index k = 0; k < d; ++k) {
      out << ',';
      put(draws.phi(k, g));
    }
    out << '\n';
  }
}

}  // namespace skewgp
