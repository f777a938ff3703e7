#include "skewgp/mvn_orthant.hpp"

#include "skewgp/errors.hpp"
#include "skewgp/linalg.hpp"
#include "skewgp/normal.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <mutex>
#include <numeric>
#include <utility>

namespace skewgp {

namespace {

#include "lattice_table.inc"

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr double kRescale = 1e200;
const double kLogRescale = std::log(kRescale);

bool is_prime(int n) {
  if (n < 2) return false;
  for (int d = 2; static_cast<long>(d) * d <= n; ++d) {
    if (n % d == 0) return false;
  }
  return true;
}

// Worst-case error of a Korobov rule over its leading dimensions (B2 kernel,
// product weights 1/j^2); only used to pick the fallback multiplier.
double korobov_criterion(int n, long a, int dims) {
  std::vector<long> z(dims);
  long g = 1;
  for (int j = 0; j < dims; ++j) {
    z[j] = g;
    g = (g * a) % n;
  }
  double total = 0.0;
  for (int k = 0; k < n; ++k) {
    double prod = 1.0;
    for (int j = 0; j < dims; ++j) {
      const double x = static_cast<double>((k * z[j]) % n) / n;
      prod *= 1.0 + 2.0 * kPi * kPi * (x * x - x + 1.0 / 6.0) / ((j + 1.0) * (j + 1.0));
    }
    total += prod;
  }
  return total / n - 1.0;
}

LatticeRule korobov_rule(int n_points, int dim) {
  static std::mutex mutex;
  static std::map<std::pair<int, int>, LatticeRule> cache;
  std::lock_guard<std::mutex> lock(mutex);
  if (auto it = cache.find({n_points, dim}); it != cache.end()) return it->second;

  int n = std::max(n_points, 3);
  while (!is_prime(n)) ++n;
  const int search_dims = std::min(dim, 8);
  long best_a = 1;
  double best = std::numeric_limits<double>::infinity();
  const int n_candidates = std::min(200, n / 2 - 1);
  for (int c = 0; c < n_candidates; ++c) {
    const long a = 2 + static_cast<long>(c) * (n / 2 - 2) / std::max(n_candidates, 1);
    const double crit = korobov_criterion(n, a, search_dims);
    if (crit < best) {
      best = crit;
      best_a = a;
    }
  }
  LatticeRule rule;
  rule.size = n;
  rule.generator.resize(dim);
  long g = 1;
  for (int j = 0; j < dim; ++j) {
    rule.generator[j] = static_cast<int>(g);
    g = (g * best_a) % n;
  }
  cache.emplace(std::make_pair(n_points, dim), rule);
  return rule;
}

struct Prepared {
  Vector upper;           // permuted limits
  std::vector<double> l;  // permuted lower Cholesky factor, row-major
  Index m = 0;
};

double clamp_unit(double u) {
  constexpr double tiny = std::numeric_limits<double>::min();
  return std::clamp(u, tiny, 1.0 - 1e-17);
}

// log of the integrand at one transformed point; w has m - 1 coordinates.
double log_integrand(const Prepared& p, const double* w, std::vector<double>& y) {
  const Index m = p.m;
  const double* l = p.l.data();
  double e = normal_cdf(p.upper(0) / l[0]);
  if (e <= 0.0) return kNegInf;
  double prod = e;
  int rescales = 0;
  for (Index i = 1; i < m; ++i) {
    y[i - 1] = normal_quantile(clamp_unit(w[i - 1] * e));
    const double* row = l + i * m;
    double s = 0.0;
    for (Index k = 0; k < i; ++k) s += row[k] * y[k];
    e = normal_cdf((p.upper(i) - s) / row[i]);
    if (e <= 0.0) return kNegInf;
    prod *= e;
    if (prod < 1.0 / kRescale) {
      prod *= kRescale;
      ++rescales;
    }
  }
  return std::log(prod) - rescales * kLogRescale;
}

double log_sum_exp(const std::vector<double>& v) {
  double mx = kNegInf;
  for (double x : v) mx = std::max(mx, x);
  if (mx == kNegInf) return kNegInf;
  double s = 0.0;
  for (double x : v) s += std::exp(x - mx);
  return mx + std::log(s);
}

void validate_request(const CdfRequest& req) {
  if (req.cov.rows() != req.upper.size() || req.cov.cols() != req.upper.size()) {
    throw ValidationError("mvn_cdf: covariance must be m x m with m = length of upper limits");
  }
  if (req.n_points < 1 || req.n_shifts < 1) {
    throw ValidationError("mvn_cdf: n_points and n_shifts must be positive");
  }
  require_finite(req.upper, "mvn_cdf upper limits");
  require_finite(req.cov, "mvn_cdf covariance");
  require_symmetric(req.cov, 1e-12, "mvn_cdf covariance");
}

}  // namespace

LatticeRule lattice_rule(int n_points, int dim) {
  if (dim <= kTableMaxDim) {
    for (std::size_t t = 0; t < std::size(kTableSizes); ++t) {
      if (kTableSizes[t] >= n_points) {
        LatticeRule rule;
        rule.size = kTableSizes[t];
        rule.generator.assign(kTableVectors[t], kTableVectors[t] + dim);
        rule.from_table = true;
        return rule;
      }
    }
  }
  return korobov_rule(n_points, dim);
}

IndexList variable_reordering(const Matrix& cov, const Vector& upper) {
  const Index m = upper.size();
  IndexList perm(m);
  std::iota(perm.begin(), perm.end(), Index{0});
  Matrix c = cov;
  Vector a = upper;
  Matrix l = Matrix::Zero(m, m);
  Vector y = Vector::Zero(m);
  for (Index i = 0; i < m; ++i) {
    Index best = -1;
    double best_mass = std::numeric_limits<double>::infinity();
    double best_sd = 0.0;
    double best_shift = 0.0;
    for (Index j = i; j < m; ++j) {
      const double var = c(j, j) - l.row(j).head(i).squaredNorm();
      if (!(var > 0.0)) continue;
      const double sd = std::sqrt(var);
      const double shift = l.row(j).head(i).dot(y.head(i));
      const double mass = normal_cdf((a(j) - shift) / sd);
      const bool better = mass < best_mass - 1e-13 ||
                          (std::fabs(mass - best_mass) <= 1e-13 && best >= 0 && perm[j] < perm[best]);
      if (best < 0 || better) {
        best = j;
        best_mass = mass;
        best_sd = sd;
        best_shift = shift;
      }
    }
    if (best < 0) break;  // remaining block is numerically singular; keep order
    if (best != i) {
      std::swap(perm[i], perm[best]);
      std::swap(a(i), a(best));
      c.row(i).swap(c.row(best));
      c.col(i).swap(c.col(best));
      l.row(i).swap(l.row(best));
    }
    l(i, i) = best_sd;
    for (Index r = i + 1; r < m; ++r) {
      l(r, i) = (c(r, i) - l.row(r).head(i).dot(l.row(i).head(i))) / best_sd;
    }
    const double b = (a(i) - best_shift) / best_sd;
    const double mass = normal_cdf(b);
    y(i) = mass > 1e-300 ? -normal_pdf(b) / mass : b;
  }
  return perm;
}

CdfEstimate mvn_cdf(const CdfRequest& req, bool reorder) {
  validate_request(req);
  const Index m = req.upper.size();
  CdfEstimate out;
  if (m == 0) return out;

  const Cholesky base = jittered_cholesky(req.cov, "mvn_cdf covariance");
  Matrix cov = req.cov;
  cov.diagonal().array() += base.jitter;

  if (m == 1) {
    const double t = req.upper(0) / std::sqrt(cov(0, 0));
    out.log_value = normal_log_cdf(t);
    out.value = std::exp(out.log_value);
    return out;
  }

  IndexList perm(m);
  std::iota(perm.begin(), perm.end(), Index{0});
  if (reorder) perm = variable_reordering(cov, req.upper);

  Prepared prep;
  prep.m = m;
  prep.upper = select(req.upper, perm);
  const Cholesky chol = jittered_cholesky(select(cov, perm, perm), "mvn_cdf covariance");
  const Matrix lower = chol.lower();
  prep.l.resize(static_cast<std::size_t>(m * m));
  for (Index i = 0; i < m; ++i) {
    for (Index j = 0; j < m; ++j) prep.l[i * m + j] = lower(i, j);
  }

  const int dim = static_cast<int>(m - 1);
  const LatticeRule rule = lattice_rule(req.n_points, dim);
  const int n = rule.size;

  std::vector<double> shift_logs(req.n_shifts);
  std::vector<double> point_logs(n);
  std::vector<double> w(dim), y(dim), base_point(dim), delta(dim);
  for (int k = 0; k < req.n_shifts; ++k) {
    Rng rng(sub_seed(req.seed, static_cast<std::uint64_t>(k)));
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    for (int d = 0; d < dim; ++d) delta[d] = unif(rng);
    for (int j = 0; j < n; ++j) {
      for (int d = 0; d < dim; ++d) {
        const double frac = static_cast<double>((static_cast<long>(j) * rule.generator[d]) % n) / n;
        double x = frac + delta[d];
        x -= std::floor(x);
        w[d] = 1.0 - std::fabs(2.0 * x - 1.0);
      }
      point_logs[j] = log_integrand(prep, w.data(), y);
    }
    shift_logs[k] = log_sum_exp(point_logs) - std::log(static_cast<double>(n));
  }

  out.log_value = log_sum_exp(shift_logs) - std::log(static_cast<double>(req.n_shifts));
  if (out.log_value == kNegInf) {
    out.value = 0.0;
    out.std_error = 0.0;
    return out;
  }
  out.value = std::exp(out.log_value);
  if (req.n_shifts > 1) {
    double mean = 0.0;
    for (double s : shift_logs) mean += std::exp(s - out.log_value);
    mean /= req.n_shifts;
    double var = 0.0;
    for (double s : shift_logs) {
      const double d = std::exp(s - out.log_value) - mean;
      var += d * d;
    }
    var /= (req.n_shifts - 1);
    out.relative_error = std::sqrt(var / req.n_shifts);
    out.std_error = out.value * out.relative_error;
  }
  return out;
}

CdfEstimate orthant_probability(const Vector& upper, const Matrix& cov, const OrthantOptions& opts) {
  CdfRequest req{upper, cov, opts.n_points, opts.n_shifts, opts.seed};
  return mvn_cdf(req, opts.reorder);
}

}  // namespace skewgp
