#include "skewgp/linconstr_sampler.hpp"

#include "skewgp/errors.hpp"
#include "skewgp/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace skewgp {

namespace {

constexpr double kTwoPi = 2.0 * kPi;

void check_constraints(const LinearConstraints& c, Index dim) {
  if (c.A.cols() != dim || c.A.rows() != c.b.size()) {
    throw ValidationError("linear constraints: A must be m x d and b of length m");
  }
  require_finite(c.A, "constraint matrix");
  require_finite(c.b, "constraint offsets");
}

void check_feasible(const LinearConstraints& c, const Vector& x0) {
  const IndexList bad = c.violated(x0);
  if (bad.empty()) return;
  std::string msg = "initial point violates constraints:";
  for (std::size_t i = 0; i < bad.size() && i < 20; ++i) msg += " " + std::to_string(bad[i]);
  if (bad.size() > 20) msg += " ...";
  throw ValidationError(msg);
}

double wrap(double theta) {
  double t = std::fmod(theta, kTwoPi);
  if (t < 0.0) t += kTwoPi;
  return t;
}

}  // namespace

IndexList LinearConstraints::violated(const Vector& u) const {
  IndexList out;
  const Vector s = slack(u);
  for (Index i = 0; i < s.size(); ++i) {
    if (!(s(i) > 0.0)) out.push_back(i);
  }
  return out;
}

LinearConstraints LinearConstraints::componentwise(const Vector& lower_shift) {
  const Index d = lower_shift.size();
  return {Matrix::Identity(d, d), lower_shift};
}

std::vector<Arc> active_arcs(const Vector& x, const Vector& nu, const LinearConstraints& constraints) {
  const Vector alpha = constraints.A * x;
  const Vector beta = constraints.A * nu;
  std::vector<Arc> blocked;
  for (Index i = 0; i < constraints.size(); ++i) {
    const double r = std::hypot(alpha(i), beta(i));
    const double c = constraints.b(i);
    if (r <= c) continue;  // never binding, or tangent
    // alpha cos + beta sin = r cos(theta - phi) must exceed -c.
    const double phi = std::atan2(beta(i), alpha(i));
    const double psi = std::acos(std::clamp(-c / r, -1.0, 1.0));
    const double start = wrap(phi + psi);
    const double len = kTwoPi - 2.0 * psi;
    if (len <= 0.0) continue;
    if (start + len <= kTwoPi) {
      blocked.push_back({start, start + len});
    } else {
      blocked.push_back({start, kTwoPi});
      blocked.push_back({0.0, start + len - kTwoPi});
    }
  }
  std::sort(blocked.begin(), blocked.end(), [](const Arc& a, const Arc& b) { return a.lo < b.lo; });

  std::vector<Arc> feasible;
  double cursor = 0.0;
  for (const Arc& arc : blocked) {
    if (arc.lo > cursor) feasible.push_back({cursor, arc.lo});
    cursor = std::max(cursor, arc.hi);
  }
  if (cursor < kTwoPi) feasible.push_back({cursor, kTwoPi});
  if (feasible.empty()) {
    throw NumericalError("active_arcs: empty feasible set on the ellipse (current state infeasible?)");
  }
  return feasible;
}

Vector feasible_start(const LinearConstraints& constraints, double margin) {
  Vector x = Vector::Zero(constraints.dim());
  for (int pass = 0; pass < 200; ++pass) {
    const Vector s = constraints.slack(x);
    bool moved = false;
    for (Index i = 0; i < s.size(); ++i) {
      const double need = margin - s(i);
      if (need <= 0.0) continue;
      const double norm2 = constraints.A.row(i).squaredNorm();
      if (norm2 == 0.0) {
        throw ValidationError("constraint " + std::to_string(i) + " has a zero row and cannot be satisfied");
      }
      // Recompute the slack so that earlier moves in this pass are honored.
      const double cur = constraints.A.row(i).dot(x) + constraints.b(i);
      if (cur >= margin) continue;
      x += constraints.A.row(i).transpose() * ((margin - cur) / norm2);
      moved = true;
    }
    if (!moved) return x;
  }
  if (!constraints.violated(x).empty()) {
    throw NumericalError("feasible_start: could not find a strictly feasible point");
  }
  return x;
}

LinEssChain::LinEssChain(Matrix cov_chol, LinearConstraints constraints, Vector x0, std::uint64_t seed)
    : current_(std::move(x0)),
      cov_chol_(std::move(cov_chol)),
      constraints_(std::move(constraints)),
      rng_(seed) {
  check_constraints(constraints_, current_.size());
  if (cov_chol_.rows() != current_.size() || cov_chol_.cols() != current_.size()) {
    throw ValidationError("lin-ess: Cholesky factor dimension does not match the initial point");
  }
  check_feasible(constraints_, current_);
}

const Vector& LinEssChain::step() {
  const Vector nu = cov_chol_.triangularView<Eigen::Lower>() * standard_normal(rng_, current_.size());
  const std::vector<Arc> arcs = active_arcs(current_, nu, constraints_);
  double total = 0.0;
  for (const Arc& a : arcs) total += a.hi - a.lo;
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  // Rounding at an arc end can leave a state with zero slack; redraw the angle
  // on the same ellipse in that case.
  for (int attempt = 0; attempt < 100; ++attempt) {
    double u = unif(rng_) * total;
    double theta = arcs.back().hi;
    for (const Arc& a : arcs) {
      const double len = a.hi - a.lo;
      if (u < len) {
        theta = a.lo + u;
        break;
      }
      u -= len;
    }
    Vector proposal = current_ * std::cos(theta) + nu * std::sin(theta);
    if (constraints_.size() == 0 || (constraints_.slack(proposal).array() > 0.0).all()) {
      current_ = std::move(proposal);
      break;
    }
  }
  ++n_iterations_;
  ++n_accepted_;
  return current_;
}

SampleResult sample_truncated_chol(const Matrix& cov_chol, const LinearConstraints& constraints,
                                   const Vector& x0, Index n_samples, std::uint64_t seed,
                                   const SamplerOptions& opts) {
  if (n_samples < 0) throw ValidationError("sample_truncated: n_samples must be non-negative");
  if (opts.thin < 1 || opts.burn_in < 0 || opts.chain_length < 1) {
    throw ValidationError("sample_truncated: invalid sampler options");
  }
  check_constraints(constraints, x0.size());
  check_feasible(constraints, x0);

  SampleResult out;
  out.samples.resize(n_samples, x0.size());
  Index filled = 0;
  std::uint64_t chain_id = 0;
  while (filled < n_samples) {
    const Index this_chain = std::min(opts.chain_length, n_samples - filled);
    LinEssChain chain(cov_chol, constraints, x0, sub_seed(seed, chain_id++));
    for (Index i = 0; i < opts.burn_in; ++i) chain.step();
    for (Index i = 0; i < this_chain; ++i) {
      for (Index t = 0; t < opts.thin; ++t) chain.step();
      out.samples.row(filled++) = chain.current().transpose();
    }
    out.n_iterations += chain.n_iterations();
    out.n_accepted += chain.n_accepted();
    ++out.n_chains;
  }
  return out;
}

SampleResult sample_truncated(const Matrix& cov, const LinearConstraints& constraints, const Vector& x0,
                              Index n_samples, std::uint64_t seed, const SamplerOptions& opts) {
  require_finite(cov, "sampler covariance");
  require_symmetric(cov, 1e-10, "sampler covariance");
  const Cholesky chol = jittered_cholesky(cov, "sampler covariance");
  return sample_truncated_chol(chol.lower(), constraints, x0, n_samples, seed, opts);
}

SampleResult sample_truncated_ess(const Matrix& cov, const LinearConstraints& constraints, const Vector& x0,
                                  Index n_samples, std::uint64_t seed, const EssOptions& opts) {
  if (n_samples < 0 || opts.burn_in < 0 || opts.thin < 1) {
    throw ValidationError("sample_truncated_ess: invalid options");
  }
  require_finite(cov, "sampler covariance");
  require_symmetric(cov, 1e-10, "sampler covariance");
  check_constraints(constraints, x0.size());
  check_feasible(constraints, x0);
  const Matrix chol = jittered_cholesky(cov, "sampler covariance").lower();

  SampleResult out;
  const double k = opts.sharpness;
  auto log_lik = [&](const Vector& u) {
    ++out.n_likelihood_evals;
    const Vector s = constraints.slack(u);
    double total = 0.0;
    for (Index i = 0; i < s.size(); ++i) {
      const double t = k * s(i);
      // log sigmoid(t), stable for both signs
      total += t >= 0.0 ? -std::log1p(std::exp(-t)) : t - std::log1p(std::exp(t));
    }
    return total;
  };

  Rng rng(seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  Vector x = x0;
  double ll = log_lik(x);
  auto step = [&]() {
    const Vector nu = chol.triangularView<Eigen::Lower>() * standard_normal(rng, x.size());
    const double threshold = ll + std::log(unif(rng));
    double theta = unif(rng) * kTwoPi;
    double lo = theta - kTwoPi;
    double hi = theta;
    for (;;) {
      Vector proposal = x * std::cos(theta) + nu * std::sin(theta);
      const double pl = log_lik(proposal);
      if (pl > threshold) {
        x = std::move(proposal);
        ll = pl;
        return;
      }
      if (theta < 0.0) {
        lo = theta;
      } else {
        hi = theta;
      }
      theta = lo + unif(rng) * (hi - lo);
    }
  };

  for (Index i = 0; i < opts.burn_in; ++i) step();
  out.samples.resize(n_samples, x0.size());
  for (Index i = 0; i < n_samples; ++i) {
    for (Index t = 0; t < opts.thin; ++t) step();
    out.samples.row(i) = x.transpose();
  }
  out.n_iterations = opts.burn_in + n_samples * opts.thin;
  out.n_accepted = out.n_iterations;
  out.n_chains = 1;
  return out;
}

double effective_sample_size(const Vector& chain) {
  const Index n = chain.size();
  if (n < 4) return static_cast<double>(n);
  const Vector centered = chain.array() - chain.mean();
  const double var = centered.squaredNorm() / n;
  if (var <= 0.0) return static_cast<double>(n);
  auto autocorr = [&](Index lag) {
    return centered.head(n - lag).dot(centered.tail(n - lag)) / (n * var);
  };
  double sum = 0.0;
  for (Index lag = 1; lag + 1 < n; lag += 2) {
    const double pair = autocorr(lag) + autocorr(lag + 1);
    if (pair <= 0.0) break;
    sum += pair;
  }
  const double tau = 1.0 + 2.0 * sum;
  return static_cast<double>(n) / std::max(tau, 1e-12);
}

}  // namespace skewgp
