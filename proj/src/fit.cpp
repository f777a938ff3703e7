#include "skewgp/fit.hpp"

#include "skewgp/errors.hpp"
#include "skewgp/normal.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace skewgp {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr double kLogParamBound = 6.9;  // hyperparameters stay within [1e-3, 1e3]
constexpr double kPseudoPointBound = 5.0;
constexpr double kGammaBound = 8.0;
constexpr double kPseudoPointNoise = 0.05;

struct Layout {
  KernelFamily family;
  Index p = 0;
  Index s = 0;
  Index n_kernel() const { return n_log_params(family, p); }
  Index size() const { return n_kernel() + s * p + s; }

  SkewGpPrior decode(const Vector& theta, const Vector& phase) const {
    SkewGpPrior prior;
    const Vector k = theta.head(n_kernel()).cwiseMax(-kLogParamBound).cwiseMin(kLogParamBound);
    prior.kernel = from_log_params(family, k, p);
    prior.pseudo_points = Matrix(s, p);
    for (Index i = 0; i < s; ++i) {
      for (Index j = 0; j < p; ++j) {
        prior.pseudo_points(i, j) = std::clamp(theta(n_kernel() + i * p + j), -kPseudoPointBound, kPseudoPointBound);
      }
    }
    prior.phase = phase;
    prior.gamma = theta.tail(s).cwiseMax(-kGammaBound).cwiseMin(kGammaBound);
    return prior;
  }

  Vector encode(const KernelConfig& kernel, const Matrix& R, const Vector& gamma) const {
    Vector theta(size());
    theta.head(n_kernel()) = to_log_params(kernel);
    for (Index i = 0; i < s; ++i) {
      for (Index j = 0; j < p; ++j) theta(n_kernel() + i * p + j) = R(i, j);
    }
    theta.tail(s) = gamma;
    return theta;
  }
};

std::vector<Vector> phase_patterns(Index s) {
  std::vector<Vector> out;
  if (s > 4) {
    out.push_back(Vector::Ones(s));
    return out;
  }
  for (Index mask = 0; mask < (Index{1} << s); ++mask) {
    Vector l(s);
    for (Index i = 0; i < s; ++i) l(i) = (mask >> i) & 1 ? -1.0 : 1.0;
    out.push_back(l);
  }
  return out;
}

KernelConfig default_kernel(KernelFamily family, Index p) {
  if (family == KernelFamily::NeuralNet) return KernelConfig::neural_net(1.0, Vector::Ones(p), 1.0, 1.0);
  return KernelConfig::rbf(1.0, Vector::Ones(p));
}

Matrix draw_pseudo_points(const Matrix& X, Index s, Rng& rng) {
  Matrix R(s, X.cols());
  if (s == 0) return R;
  std::vector<Index> rows(static_cast<std::size_t>(X.rows()));
  for (Index i = 0; i < X.rows(); ++i) rows[static_cast<std::size_t>(i)] = i;
  std::shuffle(rows.begin(), rows.end(), rng);
  std::normal_distribution<double> noise(0.0, kPseudoPointNoise);
  for (Index i = 0; i < s; ++i) {
    R.row(i) = X.row(rows[static_cast<std::size_t>(i % X.rows())]);
    for (Index j = 0; j < X.cols(); ++j) R(i, j) += noise(rng);
  }
  return R;
}

struct Candidate {
  Vector theta;
  Vector phase;
  double value = kNegInf;
};

}  // namespace

LogEstimate fit_objective(const SkewGpPrior& prior, const TrainingSet& train, const BatchPartition& partition,
                          FitObjective kind, const OrthantOptions& opts) {
  const SunParams params = build_prior_params(prior, train.X);
  const Vector signs = train.signs();
  return kind == FitObjective::BlockComposite ? log_ml_block_composite(params, signs, partition, opts)
                                              : log_ml_lower_bound(params, signs, partition, opts);
}

FitResult fit(const TrainingSet& train, const FitConfig& config) {
  train.validate();
  if (train.size() < 1) throw ValidationError("fit: training set is empty");
  if (config.latent_dim < 0) throw ValidationError("fit: latent dimension must be non-negative");
  if (config.batch_size < 1) throw ValidationError("fit: batch size must be positive");
  if (config.restarts < 1) throw ValidationError("fit: restarts must be positive");

  const Layout layout{config.family, train.X.cols(), config.latent_dim};
  const BatchPartition partition = BatchPartition::random(train.size(), config.batch_size, sub_seed(config.seed, 1));
  OrthantOptions search = config.search_orthant;
  search.seed = sub_seed(config.seed, 2);  // common random numbers across evaluations

  Index n_evals = 0;
  auto objective = [&](const Vector& theta, const Vector& phase) {
    ++n_evals;
    try {
      const double v = fit_objective(layout.decode(theta, phase), train, partition, config.objective, search).log_value;
      return std::isfinite(v) ? v : kNegInf;
    } catch (const Error&) {
      return kNegInf;
    }
  };

  const KernelConfig kernel0 = config.initial_kernel ? *config.initial_kernel : default_kernel(config.family, layout.p);
  kernel0.validate(layout.p);
  const std::vector<Vector> phases = phase_patterns(layout.s);
  std::vector<Vector> gammas{Vector::Zero(layout.s)};
  if (config.gp_like_gamma && layout.s > 0) gammas.push_back(Vector::Constant(layout.s, *config.gp_like_gamma));

  Rng rng(sub_seed(config.seed, 3));
  Candidate overall;
  std::vector<double> trace_value;
  std::vector<double> trace_best;
  for (Index restart = 0; restart < config.restarts; ++restart) {
    Candidate start;
    for (Index attempt = 0; attempt < config.init_redraws && !std::isfinite(start.value); ++attempt) {
      const Matrix R = draw_pseudo_points(train.X, layout.s, rng);
      for (const Vector& g : gammas) {
        const Vector theta = layout.encode(kernel0, R, g);
        for (const Vector& phase : phases) {
          const double v = objective(theta, phase);
          if (v > start.value) start = {theta, phase, v};
        }
      }
    }
    if (!std::isfinite(start.value)) {
      throw NumericalError("fit: objective is not finite at the initial point after " +
                           std::to_string(config.init_redraws) + " pseudo-point draws");
    }

    SpsaOptions spsa = config.spsa;
    spsa.seed = sub_seed(config.seed, 100 + static_cast<std::uint64_t>(restart));
    const Vector phase = start.phase;
    const SpsaResult res = spsa_maximize([&](const Vector& t) { return objective(t, phase); }, start.theta, spsa);
    Candidate best{res.best_x, phase, res.best_value};
    for (const Vector& alt : phases) {
      if (alt == phase) continue;
      const double v = objective(best.theta, alt);
      if (v > best.value) best = {best.theta, alt, v};
    }
    const double prior_best = trace_best.empty() ? kNegInf : trace_best.back();
    for (std::size_t i = 0; i < res.trace_value.size(); ++i) {
      trace_value.push_back(res.trace_value[i]);
      trace_best.push_back(std::max(prior_best, res.trace_best[i]));
    }
    trace_best.push_back(std::max(prior_best, best.value));
    trace_value.push_back(best.value);
    if (best.value > overall.value) overall = best;
  }

  const SkewGpPrior prior = layout.decode(overall.theta, overall.phase);
  OrthantOptions final_opts = config.final_orthant;
  final_opts.seed = sub_seed(config.seed, 4);
  const LogEstimate final_value = fit_objective(prior, train, partition, config.objective, final_opts);
  return FitResult{PosteriorModel(prior, train), final_value.log_value, final_value.std_error, partition,
                   std::move(trace_value), std::move(trace_best), n_evals};
}

}  // namespace skewgp
