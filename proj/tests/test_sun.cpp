#include "doctest.h"
#include "oracles.hpp"
#include "skewgp/errors.hpp"
#include "skewgp/linalg.hpp"
#include "skewgp/sun.hpp"

#include <cmath>
#include <random>

using namespace skewgp;

namespace {

// Random valid SUN_{p,s}: a random correlation matrix split into blocks.
SunParams random_sun(Index p, Index s, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd;
  Matrix a(p + s, p + s);
  for (Index i = 0; i < p + s; ++i)
    for (Index j = 0; j < p + s; ++j) a(i, j) = nd(rng);
  Matrix m = a * a.transpose() + 0.5 * Matrix::Identity(p + s, p + s);
  const Vector d = m.diagonal().cwiseSqrt().cwiseInverse();
  m = d.asDiagonal() * m * d.asDiagonal();
  const Matrix big_gamma = m.topLeftCorner(s, s);
  const Matrix delta = m.bottomLeftCorner(p, s);
  const Matrix omega_bar = m.bottomRightCorner(p, p);
  Vector scale(p), xi(p), gamma(s);
  for (Index i = 0; i < p; ++i) {
    scale(i) = 0.5 + std::abs(nd(rng));
    xi(i) = 0.5 * nd(rng);
  }
  for (Index i = 0; i < s; ++i) gamma(i) = 0.5 * nd(rng);
  Matrix omega = scale.asDiagonal() * omega_bar * scale.asDiagonal();
  omega = (omega + omega.transpose()) / 2.0;
  return SunParams(xi, omega, delta, gamma, big_gamma);
}

SunParams skew_normal(double delta) {
  return SunParams(Vector::Zero(1), Matrix::Identity(1, 1), Matrix::Constant(1, 1, delta), Vector::Zero(1),
                   Matrix::Identity(1, 1));
}

oracle::SunOracle to_oracle(const SunParams& p) {
  return {p.xi(), p.omega(), p.delta(), p.gamma(), p.big_gamma()};
}

}  // namespace

TEST_CASE("validate") {
  SUBCASE("gaussian case is valid") {
    Matrix o(2, 2);
    o << 2, 0.5, 0.5, 1;
    CHECK(validate(SunParams::gaussian(Vector::Zero(2), o)).ok);
  }
  SUBCASE("singular block matrix is reported with its eigenvalue") {
    Matrix ob(2, 2);
    ob << 1, 0.4, 0.4, 1;
    const SunDiagnostics d = validate(SunParams(Vector::Zero(2), ob, ob, Vector::Zero(2), ob));
    CHECK_FALSE(d.ok);
    CHECK(d.min_eigenvalue < 1e-12);
    CHECK_FALSE(d.issues.empty());
  }
  SUBCASE("dimension mismatch does not throw") {
    const SunDiagnostics d = validate(SunParams(Vector::Zero(2), Matrix::Identity(3, 3), Matrix::Zero(2, 1),
                                                Vector::Zero(1), Matrix::Identity(1, 1)));
    CHECK_FALSE(d.ok);
  }
  SUBCASE("random constructions are valid") {
    for (int t = 0; t < 10; ++t) CHECK(validate(random_sun(3, 2, t)).ok);
  }
}

TEST_CASE("log_pdf reduces to the Gaussian density") {
  const SunParams base = random_sun(3, 2, 1);
  const SunParams zero_delta(base.xi(), base.omega(), Matrix::Zero(3, 2), base.gamma(), base.big_gamma());
  const SunParams gauss = SunParams::gaussian(base.xi(), base.omega());
  const Eigen::LLT<Matrix> llt(base.omega());
  const Vector z = Vector::LinSpaced(3, -0.5, 0.7);
  const double expected = mvn_log_pdf(z, base.xi(), llt);
  CHECK(log_pdf(zero_delta, z) == doctest::Approx(expected).epsilon(1e-14));
  CHECK(log_pdf(gauss, z) == doctest::Approx(expected).epsilon(1e-14));
}

TEST_CASE("univariate skew-normal density") {
  for (double delta : {-0.8, 0.3, 0.7071067811865476}) {
    const SunParams p = skew_normal(delta);
    const double alpha = delta / std::sqrt(1.0 - delta * delta);
    for (double z = -4.0; z <= 4.0; z += 0.25) {
      const double expected = 2.0 * normal_pdf(z) * normal_cdf(alpha * z);
      CHECK(std::exp(log_pdf(p, Vector::Constant(1, z))) == doctest::Approx(expected).epsilon(1e-6));
    }
  }
}

TEST_CASE("density integrates to one") {
  SUBCASE("p = 1") {
    const SunParams p = random_sun(1, 2, 3);
    const SunDensity dens(p);
    const oracle::Rule gl = oracle::gauss_legendre(200);
    const double sd = std::sqrt(p.omega()(0, 0));
    const double lo = p.xi()(0) - 10 * sd;
    const double hi = p.xi()(0) + 10 * sd;
    double total = 0.0;
    for (std::size_t i = 0; i < gl.nodes.size(); ++i) {
      const double z = lo + (hi - lo) * (gl.nodes[i] + 1.0) / 2.0;
      total += gl.weights[i] * (hi - lo) / 2.0 * std::exp(dens.log_pdf(Vector::Constant(1, z)));
    }
    CHECK(std::abs(total - 1.0) < 1e-3);
  }
  SUBCASE("p = 2") {
    const SunParams p = random_sun(2, 1, 4);
    const SunDensity dens(p);
    const Matrix L = Eigen::LLT<Matrix>(p.omega()).matrixL();
    const Eigen::LLT<Matrix> llt(p.omega());
    // E_{N(xi, Omega)}[pdf / phi] = 1.
    const double total = oracle::gh_expectation(2, 40, [&](const Vector& z) {
      const Vector x = p.xi() + L * z;
      return std::exp(dens.log_pdf(x) - mvn_log_pdf(x, p.xi(), llt));
    });
    CHECK(std::abs(total - 1.0) < 1e-3);
  }
}

TEST_CASE("marginalize") {
  const SunParams p = random_sun(3, 2, 5);
  SUBCASE("keeping everything is the identity") {
    const SunParams m = marginalize(p, {0, 1, 2});
    CHECK(m.omega() == p.omega());
    CHECK(m.delta() == p.delta());
    CHECK(m.gamma() == p.gamma());
  }
  SUBCASE("zero skewness gives the Gaussian marginal") {
    const SunParams g(p.xi(), p.omega(), Matrix::Zero(3, 2), p.gamma(), p.big_gamma());
    const SunParams m = marginalize(g, {2, 0});
    CHECK(m.omega()(0, 1) == p.omega()(2, 0));
    CHECK(m.delta().isZero());
  }
  SUBCASE("p=3 to 2 marginal matches numerical integration") {
    const SunDensity full(p);
    const SunDensity marg(marginalize(p, {0, 1}));
    const oracle::Rule gl = oracle::gauss_legendre(120);
    const double sd = std::sqrt(p.omega()(2, 2));
    for (int t = 0; t < 3; ++t) {
      Vector z2 = p.xi().head(2);
      z2(0) += 0.3 * t - 0.3;
      z2(1) -= 0.2 * t;
      const double lo = p.xi()(2) - 9 * sd;
      const double hi = p.xi()(2) + 9 * sd;
      double total = 0.0;
      for (std::size_t i = 0; i < gl.nodes.size(); ++i) {
        Vector z(3);
        z << z2, lo + (hi - lo) * (gl.nodes[i] + 1.0) / 2.0;
        total += gl.weights[i] * (hi - lo) / 2.0 * std::exp(full.log_pdf(z));
      }
      CHECK(std::abs(total - std::exp(marg.log_pdf(z2))) < 1e-4);
    }
  }
  SUBCASE("bad index sets") {
    CHECK_THROWS_AS(marginalize(p, {}), ValidationError);
    CHECK_THROWS_AS(marginalize(p, {0, 0}), ValidationError);
    CHECK_THROWS_AS(marginalize(p, {3}), ValidationError);
  }
}

TEST_CASE("condition") {
  const SunParams p = random_sun(3, 2, 6);
  SUBCASE("zero skewness is Gaussian conditioning") {
    const SunParams g(p.xi(), p.omega(), Matrix::Zero(3, 2), p.gamma(), p.big_gamma());
    Vector v(1);
    v << 0.4;
    const SunParams c = condition(g, {1}, v);
    const IndexList rest{0, 2};
    const Matrix o = p.omega();
    const Matrix expected = select(o, rest, rest) - select(o, rest, {1}) * select(o, {1}, rest) / o(1, 1);
    CHECK((c.omega() - expected).cwiseAbs().maxCoeff() < 1e-12);
    CHECK(c.delta().isZero());
  }
  SUBCASE("zero innovation keeps gamma and xi") {
    const SunParams c = condition(p, {0}, p.xi().head(1));
    CHECK((c.gamma() - p.gamma()).cwiseAbs().maxCoeff() == 0.0);
    CHECK(c.xi()(0) == p.xi()(1));
    CHECK(c.xi()(1) == p.xi()(2));
  }
  SUBCASE("conditional times marginal equals joint") {
    const SunDensity joint(p);
    for (int t = 0; t < 4; ++t) {
      Vector z = p.xi() + Vector::LinSpaced(3, -0.4, 0.5) * (t + 1) * 0.5;
      const SunDensity marg(marginalize(p, {0}));
      const SunDensity cond(condition(p, {0}, z.head(1)));
      const double lhs = joint.log_pdf(z);
      const double rhs = marg.log_pdf(z.head(1)) + cond.log_pdf(z.tail(2));
      CHECK(std::abs(lhs - rhs) < 1e-6);
    }
  }
  SUBCASE("result satisfies the invariants") {
    const SunParams c = condition(p, {2}, Vector::Constant(1, 1.3));
    CHECK(validate(c).ok);
  }
  SUBCASE("observed set must be a proper subset") {
    CHECK_THROWS_AS(condition(p, {0, 1, 2}, Vector::Zero(3)), ValidationError);
  }
}

TEST_CASE("affine map") {
  const SunParams p = random_sun(2, 1, 7);
  const SunParams neg = affine(p, Vector::Zero(2), -Matrix::Identity(2, 2));
  CHECK(validate(neg).ok);
  const Vector z = Vector::LinSpaced(2, -0.3, 0.4);
  CHECK(log_pdf(neg, -z) == doctest::Approx(log_pdf(p, z)).epsilon(1e-10));
}

TEST_CASE("sampling") {
  SUBCASE("zero skewness reproduces the Gaussian moments") {
    const SunParams base = random_sun(2, 2, 8);
    const SunParams g(base.xi(), base.omega(), Matrix::Zero(2, 2), base.gamma(), base.big_gamma());
    const SunSample s = sample(g, 10000, 1);
    for (Index j = 0; j < 2; ++j) {
      const Vector c = s.z.col(j);
      const double se = std::sqrt(g.omega()(j, j) / c.size());
      CHECK(std::abs(c.mean() - g.xi()(j)) < 3.0 * se);
      CHECK(std::abs(oracle::variance(c) - g.omega()(j, j)) < 3.0 * g.omega()(j, j) * std::sqrt(2.0 / c.size()));
    }
  }
  SUBCASE("skew-normal mean") {
    const double delta = 1.0 / std::sqrt(2.0);
    const SunSample s = sample(skew_normal(delta), 20000, 2);
    CHECK(std::abs(s.z.col(0).mean() - std::sqrt(2.0 / kPi) * delta) < 0.02);
  }
  SUBCASE("histogram matches the density") {
    const SunParams p = skew_normal(0.9);
    const SunSample s = sample(p, 200000, 3);
    const double lo = -3.0;
    const double width = 0.25;
    const int bins = 28;
    std::vector<double> counts(bins, 0.0);
    for (Index i = 0; i < s.z.rows(); ++i) {
      const int b = static_cast<int>(std::floor((s.z(i, 0) - lo) / width));
      if (b >= 0 && b < bins) counts[b] += 1.0;
    }
    // Compare against the density averaged over each bin.
    const oracle::Rule gl = oracle::gauss_legendre(8);
    const SunDensity dens(p);
    double gap = 0.0;
    for (int b = 0; b < bins; ++b) {
      const double a = lo + b * width;
      double avg = 0.0;
      for (std::size_t i = 0; i < gl.nodes.size(); ++i) {
        const double z = a + width * (gl.nodes[i] + 1.0) / 2.0;
        avg += gl.weights[i] / 2.0 * std::exp(dens.log_pdf(Vector::Constant(1, z)));
      }
      const double emp = counts[b] / (s.z.rows() * width);
      gap = std::max(gap, std::abs(emp - avg));
    }
    CHECK(gap < 0.02);
  }
  SUBCASE("sampler and density agree on random parameter sets") {
    for (int t = 0; t < 5; ++t) {
      const SunParams p = random_sun(1, 2, 20 + t);
      const SunSample s = sample(p, 10000, 30 + t);
      const SunDensity dens(p);
      const oracle::SunOracle o = to_oracle(p);
      const double sd = std::sqrt(p.omega()(0, 0));
      const oracle::Rule gl = oracle::gauss_legendre(200);
      const double lo = p.xi()(0) - 9 * sd;
      const double hi = p.xi()(0) + 9 * sd;
      double mean = 0.0;
      double oracle_mean = 0.0;
      for (std::size_t i = 0; i < gl.nodes.size(); ++i) {
        const double z = lo + (hi - lo) * (gl.nodes[i] + 1.0) / 2.0;
        const double w = gl.weights[i] * (hi - lo) / 2.0;
        mean += w * z * std::exp(dens.log_pdf(Vector::Constant(1, z)));
        oracle_mean += w * z * o.pdf(Vector::Constant(1, z));
      }
      CHECK(std::abs(mean - oracle_mean) < 1e-4);
      const Vector c = s.z.col(0);
      CHECK(std::abs(c.mean() - mean) < 3.0 * oracle::batch_se(c));
    }
  }
  SUBCASE("large gamma is treated as Gaussian") {
    SunParams p = skew_normal(0.7);
    p = SunParams(p.xi(), p.omega(), p.delta(), Vector::Constant(1, 9.0), p.big_gamma());
    const SunSample s = sample(p, 5000, 4);
    CHECK(s.n_iterations == 0);
    CHECK(std::abs(s.z.col(0).mean()) < 0.05);
  }
  SUBCASE("deterministic under a seed") {
    const SunParams p = random_sun(2, 2, 9);
    CHECK(sample(p, 200, 5).z == sample(p, 200, 5).z);
  }
}
