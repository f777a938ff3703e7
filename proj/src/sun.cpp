#include "skewgp/sun.hpp"

#include "skewgp/errors.hpp"
#include "skewgp/linalg.hpp"
#include "skewgp/normal.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

namespace skewgp {

namespace {

void check_index_set(const IndexList& idx, Index p, const char* what) {
  if (idx.empty()) throw ValidationError(std::string(what) + ": index set is empty");
  std::set<Index> seen;
  for (Index i : idx) {
    if (i < 0 || i >= p) throw ValidationError(std::string(what) + ": index " + std::to_string(i) + " out of range");
    if (!seen.insert(i).second) throw ValidationError(std::string(what) + ": duplicate index " + std::to_string(i));
  }
}

Matrix gaussian_draws(const Matrix& cov_chol, Index n, Rng& rng) {
  Matrix out(n, cov_chol.rows());
  for (Index i = 0; i < n; ++i) {
    out.row(i) = (cov_chol.triangularView<Eigen::Lower>() * standard_normal(rng, cov_chol.rows())).transpose();
  }
  return out;
}

}  // namespace

SunParams::SunParams(Vector xi, Matrix omega, Matrix delta, Vector gamma, Matrix big_gamma)
    : xi_(std::move(xi)),
      omega_(std::move(omega)),
      delta_(std::move(delta)),
      gamma_(std::move(gamma)),
      big_gamma_(std::move(big_gamma)) {
  d_omega_ = omega_.diagonal().cwiseSqrt();
  const Vector inv = d_omega_.cwiseInverse();
  omega_bar_ = inv.asDiagonal() * omega_ * inv.asDiagonal();
  if (omega_bar_.rows() == omega_bar_.cols()) omega_bar_.diagonal().setOnes();
}

SunParams SunParams::gaussian(Vector xi, Matrix omega) {
  const Index p = xi.size();
  return SunParams(std::move(xi), std::move(omega), Matrix(p, 0), Vector(0), Matrix(0, 0));
}

Matrix SunParams::joint_correlation() const {
  const Index s = latent_dim();
  const Index p = dim();
  Matrix m(s + p, s + p);
  m.topLeftCorner(s, s) = big_gamma_;
  m.topRightCorner(s, p) = delta_.transpose();
  m.bottomLeftCorner(p, s) = delta_;
  m.bottomRightCorner(p, p) = omega_bar_;
  return m;
}

SunDiagnostics validate(const SunParams& params) {
  SunDiagnostics d;
  auto fail = [&](std::string msg) {
    d.ok = false;
    d.issues.push_back(std::move(msg));
  };
  const Index p = params.dim();
  const Index s = params.latent_dim();
  if (params.omega().rows() != p || params.omega().cols() != p) fail("Omega must be p x p");
  if (params.delta().rows() != p || params.delta().cols() != s) fail("Delta must be p x s");
  if (params.big_gamma().rows() != s || params.big_gamma().cols() != s) fail("Gamma must be s x s");
  if (!d.ok) return d;

  if (!params.xi().allFinite() || !params.omega().allFinite() || !params.delta().allFinite() ||
      !params.gamma().allFinite() || !params.big_gamma().allFinite()) {
    fail("parameters contain non-finite values");
    return d;
  }
  auto asym = [](const Matrix& a) {
    if (a.size() == 0) return 0.0;
    return (a - a.transpose()).cwiseAbs().maxCoeff() / std::max(a.cwiseAbs().maxCoeff(), 1e-300);
  };
  if (asym(params.omega()) > 1e-10) fail("Omega is not symmetric");
  if (asym(params.big_gamma()) > 1e-10) fail("Gamma is not symmetric");
  if (p > 0 && !(params.omega().diagonal().array() > 0.0).all()) fail("Omega has a non-positive diagonal entry");
  if (!d.ok) return d;

  const Matrix m = params.joint_correlation();
  Eigen::LLT<Matrix> llt(m);
  if (llt.info() != Eigen::Success) {
    Eigen::SelfAdjointEigenSolver<Matrix> eig(m, Eigen::EigenvaluesOnly);
    d.min_eigenvalue = eig.eigenvalues().minCoeff();
    std::ostringstream os;
    os << "block matrix [[Gamma, Delta^T], [Delta, Omega_bar]] is not positive definite (smallest eigenvalue "
       << d.min_eigenvalue << ")";
    fail(os.str());
  }
  return d;
}

void require_valid(const SunParams& params, const std::string& what) {
  const SunDiagnostics d = validate(params);
  if (d.ok) return;
  std::string msg = what + " invalid:";
  for (const auto& issue : d.issues) msg += " " + issue + ";";
  throw ValidationError(msg);
}

SunDensity::SunDensity(SunParams params, OrthantOptions opts) : params_(std::move(params)), opts_(opts) {
  require_valid(params_);
  omega_llt_ = jittered_cholesky(params_.omega(), "Omega").llt;
  gaussian_ = params_.latent_dim() == 0 || params_.delta().isZero(0.0);
  if (gaussian_) return;
  const Cholesky bar = jittered_cholesky(params_.omega_bar(), "Omega_bar");
  skew_proj_ = bar.solve(params_.delta());
  cond_cov_ = params_.big_gamma() - params_.delta().transpose() * skew_proj_;
  symmetrize(cond_cov_);
  log_norm_ = orthant_probability(params_.gamma(), params_.big_gamma(), opts_).log_value;
}

double SunDensity::log_pdf(const Vector& z) const {
  if (z.size() != params_.dim()) throw ValidationError("log_pdf: point has the wrong dimension");
  const double base = mvn_log_pdf(z, params_.xi(), omega_llt_);
  if (gaussian_) return base;
  const Vector scaled = (z - params_.xi()).cwiseQuotient(params_.d_omega());
  const Vector upper = params_.gamma() + skew_proj_.transpose() * scaled;
  return base + orthant_probability(upper, cond_cov_, opts_).log_value - log_norm_;
}

double log_pdf(const SunParams& params, const Vector& z, const OrthantOptions& opts) {
  return SunDensity(params, opts).log_pdf(z);
}

SunParams marginalize(const SunParams& params, const IndexList& keep) {
  check_index_set(keep, params.dim(), "marginalize");
  return SunParams(select(params.xi(), keep), select(params.omega(), keep, keep), select_rows(params.delta(), keep),
                   params.gamma(), params.big_gamma());
}

SunParams condition(const SunParams& params, const IndexList& observed, const Vector& values) {
  const Index p = params.dim();
  check_index_set(observed, p, "condition");
  if (static_cast<Index>(observed.size()) >= p) {
    throw ValidationError("condition: observed set must be a proper subset");
  }
  if (values.size() != static_cast<Index>(observed.size())) {
    throw ValidationError("condition: values length does not match observed set");
  }
  std::vector<bool> is_obs(p, false);
  for (Index i : observed) is_obs[i] = true;
  IndexList rest;
  for (Index i = 0; i < p; ++i) {
    if (!is_obs[i]) rest.push_back(i);
  }

  const Matrix o11 = select(params.omega(), observed, observed);
  const Matrix o21 = select(params.omega(), rest, observed);
  const Matrix o22 = select(params.omega(), rest, rest);
  const Cholesky c11 = jittered_cholesky(o11, "Omega_11");

  const Vector innov = values - select(params.xi(), observed);
  const Vector xi2 = select(params.xi(), rest) + o21 * c11.solve(innov);
  Matrix omega2 = o22 - o21 * c11.solve(o21.transpose());
  symmetrize(omega2);

  const Matrix b11 = select(params.omega_bar(), observed, observed);
  const Matrix b21 = select(params.omega_bar(), rest, observed);
  const Cholesky cb11 = jittered_cholesky(b11, "Omega_bar_11");
  const Matrix delta1 = select_rows(params.delta(), observed);
  const Matrix delta2 = select_rows(params.delta(), rest);
  const Vector scaled_innov = innov.cwiseQuotient(select(params.d_omega(), observed));

  Matrix delta_cond = delta2 - b21 * cb11.solve(delta1);
  // Re-express against the conditional scale D_{2|1}.
  const Vector d2 = select(params.d_omega(), rest);
  const Vector d_cond = omega2.diagonal().cwiseMax(0.0).cwiseSqrt();
  for (Index i = 0; i < delta_cond.rows(); ++i) {
    delta_cond.row(i) *= d_cond(i) > 0.0 ? d2(i) / d_cond(i) : 0.0;
  }
  const Vector gamma2 = params.gamma() + delta1.transpose() * cb11.solve(scaled_innov);
  Matrix big_gamma2 = params.big_gamma() - delta1.transpose() * cb11.solve(delta1);
  symmetrize(big_gamma2);
  return SunParams(xi2, omega2, delta_cond, gamma2, big_gamma2);
}

SunParams affine(const SunParams& params, const Vector& c, const Matrix& A) {
  if (A.cols() != params.dim() || c.size() != A.rows()) throw ValidationError("affine: dimension mismatch");
  if (A.rows() == 0) throw ValidationError("affine: empty map");
  Matrix omega = A * params.omega() * A.transpose();
  symmetrize(omega);
  const Vector d_new = omega.diagonal().cwiseSqrt();
  if (!(d_new.array() > 0.0).all()) throw ValidationError("affine: map is not of full row rank");
  const Matrix delta = d_new.cwiseInverse().asDiagonal() * A * params.d_omega().asDiagonal() * params.delta();
  return SunParams(c + A * params.xi(), omega, delta, params.gamma(), params.big_gamma());
}

namespace {

// Start for the truncated latent chain: a draw from the untruncated Gaussian
// with every violated coordinate reflected about its bound. The projected
// boundary point is a poor start in many dimensions, since the feasible arc
// through a point near the corner of the orthant is tiny.
Vector typical_start(const Matrix& chol, const LinearConstraints& cons, Rng& rng) {
  const Vector u = chol * standard_normal(rng, chol.rows());
  Vector x = u;
  for (Index k = 0; k < cons.A.rows(); ++k) {
    Index j = 0;
    cons.A.row(k).cwiseAbs().maxCoeff(&j);
    const double bound = -cons.b(k);
    const double sd = chol.row(j).norm();
    x(j) = bound + std::max(std::abs(u(j) - bound), 1e-3 * sd);
  }
  return x;
}

}  // namespace

SunSample sample(const SunParams& params, Index n, std::uint64_t seed, const SunSampleOptions& opts) {
  require_valid(params);
  if (n < 0) throw ValidationError("sample: n must be non-negative");
  const Index p = params.dim();
  const Index s = params.latent_dim();

  SunSample out;
  out.latent = Matrix::Zero(n, s);
  Rng rng(sub_seed(seed, 0));

  Matrix u0_cov = params.omega_bar();
  Matrix skew_map = Matrix::Zero(p, s);  // Delta Gamma^{-1}
  if (s > 0) {
    const Cholesky gamma_chol = jittered_cholesky(params.big_gamma(), "Gamma");
    skew_map = gamma_chol.solve(params.delta().transpose()).transpose();
    u0_cov -= skew_map * params.delta().transpose();
    symmetrize(u0_cov);

    IndexList active;
    for (Index i = 0; i < s; ++i) {
      if (params.gamma()(i) <= opts.inactive_gamma) active.push_back(i);
    }
    if (active.empty()) {
      out.latent = gaussian_draws(gamma_chol.lower(), n, rng);
    } else {
      LinearConstraints cons;
      cons.A = Matrix::Zero(static_cast<Index>(active.size()), s);
      cons.b = Vector(static_cast<Index>(active.size()));
      for (Index k = 0; k < static_cast<Index>(active.size()); ++k) {
        cons.A(k, active[k]) = 1.0;
        cons.b(k) = params.gamma()(active[k]);
      }
      const SampleResult res = sample_truncated_chol(gamma_chol.lower(), cons, typical_start(gamma_chol.lower(), cons, rng),
                                                     n, sub_seed(seed, 1), opts.chain);
      out.latent = res.samples;
      out.n_iterations = res.n_iterations;
      out.n_accepted = res.n_accepted;
    }
  }

  const Matrix u0_chol = jittered_cholesky(u0_cov, "Omega_bar - Delta Gamma^{-1} Delta^T").lower();
  const Matrix u0 = gaussian_draws(u0_chol, n, rng);
  out.z.resize(n, p);
  for (Index i = 0; i < n; ++i) {
    const Vector y = u0.row(i).transpose() + skew_map * out.latent.row(i).transpose();
    out.z.row(i) = (params.xi() + params.d_omega().cwiseProduct(y)).transpose();
  }
  return out;
}

}  // namespace skewgp
