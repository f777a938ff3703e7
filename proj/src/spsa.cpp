#include "skewgp/spsa.hpp"

#include "skewgp/errors.hpp"
#include "skewgp/normal.hpp"

#include <cmath>
#include <limits>

namespace skewgp {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

Vector rademacher(Rng& rng, Index n) {
  std::bernoulli_distribution coin(0.5);
  Vector d(n);
  for (Index i = 0; i < n; ++i) d(i) = coin(rng) ? 1.0 : -1.0;
  return d;
}

}  // namespace

SpsaResult spsa_maximize(const Objective& f, const Vector& x0, const SpsaOptions& opts) {
  if (opts.iterations < 0) throw ValidationError("spsa: iterations must be non-negative");
  if (!(opts.c > 0.0)) throw ValidationError("spsa: c must be positive");
  const Index dim = x0.size();
  Rng rng(sub_seed(opts.seed, 0x5b5a));

  SpsaResult res;
  auto eval = [&](const Vector& x) {
    ++res.n_evaluations;
    const double v = f(x);
    const double val = std::isfinite(v) ? v : kNegInf;
    if (res.n_evaluations == 1 || val > res.best_value) {
      res.best_value = val;
      res.best_x = x;
    }
    return val;
  };

  Vector x = x0;
  double current = eval(x);
  if (dim == 0 || opts.iterations == 0) {
    res.final_x = x;
    return res;
  }

  const double A = opts.A >= 0.0 ? opts.A : 0.1 * static_cast<double>(opts.iterations);
  double a = opts.a;
  if (!(a > 0.0)) {
    // Scale a so that the first step moves each coordinate by about target_step.
    double mag = 0.0;
    Index used = 0;
    for (Index p = 0; p < opts.calibration_probes; ++p) {
      const Vector delta = rademacher(rng, dim);
      const double yp = eval(x + opts.c * delta);
      const double ym = eval(x - opts.c * delta);
      if (!std::isfinite(yp) || !std::isfinite(ym)) continue;
      mag += std::abs(yp - ym) / (2.0 * opts.c);
      ++used;
    }
    mag = used > 0 ? mag / static_cast<double>(used) : 0.0;
    a = mag > 1e-12 ? opts.target_step * std::pow(1.0 + A, opts.alpha) / mag : opts.target_step;
  }

  for (Index k = 1; k <= opts.iterations; ++k) {
    const double ak = a / std::pow(static_cast<double>(k) + A, opts.alpha);
    const double ck = opts.c / std::pow(static_cast<double>(k), opts.gamma);
    const Vector delta = rademacher(rng, dim);
    const double yp = eval(x + ck * delta);
    const double ym = eval(x - ck * delta);
    if (std::isfinite(yp) && std::isfinite(ym)) {
      // delta entries are +-1, so 1/delta_i = delta_i.
      Vector step = ak * (yp - ym) / (2.0 * ck) * delta;
      step = step.cwiseMax(-opts.max_step).cwiseMin(opts.max_step);
      x += step;
    } else if (std::isfinite(yp)) {
      x += ck * delta;
    } else if (std::isfinite(ym)) {
      x -= ck * delta;
    }
    current = eval(x);
    res.trace_value.push_back(current);
    res.trace_best.push_back(res.best_value);
  }
  res.final_x = x;
  return res;
}

}  // namespace skewgp
