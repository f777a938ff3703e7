#include "doctest.h"
#include "oracles.hpp"
#include "skewgp/errors.hpp"
#include "skewgp/linalg.hpp"
#include "skewgp/mvn_orthant.hpp"

#include <cmath>
#include <limits>
#include <random>

using namespace skewgp;

namespace {

Matrix random_spd(Index m, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd;
  Matrix a(m, m);
  for (Index i = 0; i < m; ++i)
    for (Index j = 0; j < m; ++j) a(i, j) = nd(rng);
  Matrix s = a * a.transpose() / static_cast<double>(m) + 0.3 * Matrix::Identity(m, m);
  return s;
}

Matrix equicorrelated(Index m, double rho) {
  Matrix c = Matrix::Constant(m, m, rho);
  c.diagonal().setOnes();
  return c;
}

CdfEstimate cdf(const Vector& upper, const Matrix& cov, std::uint64_t seed = 1, bool reorder = true) {
  return mvn_cdf(CdfRequest{upper, cov, 5000, 12, seed}, reorder);
}

}  // namespace

TEST_CASE("univariate and independent orthants are exact") {
  const CdfEstimate one = cdf(Vector::Zero(1), Matrix::Identity(1, 1));
  CHECK(one.value == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(one.std_error == 0.0);
  const CdfEstimate two = cdf(Vector::Zero(2), Matrix::Identity(2, 2));
  CHECK(two.value == doctest::Approx(0.25).epsilon(1e-12));
}

TEST_CASE("zero-dimensional CDF is one") {
  const CdfEstimate e = cdf(Vector(0), Matrix(0, 0));
  CHECK(e.value == 1.0);
  CHECK(e.log_value == 0.0);
  CHECK(e.std_error == 0.0);
}

TEST_CASE("bivariate orthant identity") {
  for (int k = -9; k <= 9; ++k) {
    const double rho = 0.1 * k;
    Matrix c(2, 2);
    c << 1, rho, rho, 1;
    const double exact = 0.25 + std::asin(rho) / (2.0 * kPi);
    CHECK(std::abs(cdf(Vector::Zero(2), c).value - exact) < 1e-4);
  }
}

TEST_CASE("equicorrelated one-half orthant identity") {
  for (Index m = 2; m <= 6; ++m) {
    const CdfEstimate e = cdf(Vector::Zero(m), equicorrelated(m, 0.5));
    CHECK(std::abs(e.value - 1.0 / static_cast<double>(m + 1)) < 1e-3);
  }
}

TEST_CASE("agrees with the bivariate normal oracle on random limits") {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> nd;
  for (int t = 0; t < 20; ++t) {
    const Matrix c = random_spd(2, 100 + t);
    Vector a(2);
    a << nd(rng), nd(rng);
    CHECK(std::abs(cdf(a, c).value - oracle::small_cdf(a, c)) < 1e-4);
  }
}

TEST_CASE("trivariate case agrees with a one-dimensional quadrature oracle") {
  // P(X <= a) = int_{-inf}^{a1} phi(x) P(X2, X3 <= a23 | X1 = x) dx.
  const oracle::Rule gl = oracle::gauss_legendre(200);
  for (int t = 0; t < 5; ++t) {
    const Matrix c = random_spd(3, 200 + t);
    Vector a(3);
    a << 0.3 * t - 0.5, 0.2, -0.1 * t;
    const double s1 = std::sqrt(c(0, 0));
    const Vector b = c.block(1, 0, 2, 1) / c(0, 0);
    const Matrix cc = c.block(1, 1, 2, 2) - b * c.block(0, 1, 1, 2);
    const double lo = -9.0 * s1;
    const double hi = a(0);
    double total = 0.0;
    for (std::size_t i = 0; i < gl.nodes.size(); ++i) {
      const double x = lo + (hi - lo) * (gl.nodes[i] + 1.0) / 2.0;
      total += gl.weights[i] * (hi - lo) / 2.0 * normal_pdf(x / s1) / s1 *
               oracle::small_cdf(a.tail(2) - b * x, cc);
    }
    CHECK(std::abs(cdf(a, c).value - total) < 1e-4);
  }
}

TEST_CASE("seed determinism is bit-identical") {
  const Matrix c = random_spd(7, 9);
  const Vector a = Vector::LinSpaced(7, -1.0, 1.0);
  const CdfEstimate e1 = cdf(a, c, 42);
  const CdfEstimate e2 = cdf(a, c, 42);
  CHECK(e1.value == e2.value);
  CHECK(e1.std_error == e2.std_error);
  CHECK(e1.log_value == e2.log_value);
}

TEST_CASE("monotone in the upper limits") {
  for (int t = 0; t < 10; ++t) {
    const Matrix c = random_spd(4, 300 + t);
    Vector a = Vector::Constant(4, -0.2);
    const CdfEstimate lo = cdf(a, c, 5);
    a(t % 4) += 0.5;
    const CdfEstimate hi = cdf(a, c, 5);
    CHECK(hi.value >= lo.value - 3.0 * std::hypot(lo.std_error, hi.std_error));
  }
}

TEST_CASE("a huge limit drops that variable") {
  const Matrix c = random_spd(4, 11);
  Vector a(4);
  a << 0.1, -0.3, 1e6, 0.4;
  const IndexList keep{0, 1, 3};
  const CdfEstimate full = cdf(a, c, 7);
  const CdfEstimate sub = cdf(select(a, keep), select(c, keep, keep), 7);
  CHECK(std::abs(full.value - sub.value) <= 3.0 * std::hypot(full.std_error, sub.std_error) + 1e-12);
}

TEST_CASE("reordering leaves the value unchanged") {
  for (int t = 0; t < 5; ++t) {
    const Matrix c = random_spd(5, 400 + t);
    const Vector a = Vector::LinSpaced(5, -1.0, 0.8);
    const CdfEstimate with = cdf(a, c, 3, true);
    const CdfEstimate without = cdf(a, c, 3, false);
    CHECK(std::abs(with.value - without.value) <= 3.0 * std::hypot(with.std_error, without.std_error));
  }
}

TEST_CASE("variable reordering rule") {
  SUBCASE("exchangeable case keeps the identity order") {
    const IndexList p = variable_reordering(Matrix::Identity(4, 4), Vector::Zero(4));
    CHECK(p == IndexList{0, 1, 2, 3});
  }
  SUBCASE("smallest mass first") {
    Vector a(2);
    a << -5.0, 5.0;
    CHECK(variable_reordering(Matrix::Identity(2, 2), a).front() == 0);
    a << 5.0, -5.0;
    CHECK(variable_reordering(Matrix::Identity(2, 2), a).front() == 1);
  }
}

TEST_CASE("log value survives underflow") {
  const Index m = 60;
  const CdfEstimate e = cdf(Vector::Constant(m, -6.0), Matrix::Identity(m, m));
  const double exact = m * normal_log_cdf(-6.0);
  CHECK(e.value == 0.0);
  CHECK(e.log_value == doctest::Approx(exact).epsilon(1e-10));
  CHECK(std::isfinite(e.relative_error));
}

TEST_CASE("log value matches value") {
  const Matrix c = random_spd(6, 5);
  const CdfEstimate e = cdf(Vector::Constant(6, 0.2), c);
  CHECK(std::exp(e.log_value) == doctest::Approx(e.value).epsilon(1e-12));
}

TEST_CASE("input validation") {
  SUBCASE("non-finite limits") {
    Vector a(2);
    a << 0.0, std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS_AS(cdf(a, Matrix::Identity(2, 2)), ValidationError);
  }
  SUBCASE("asymmetric covariance") {
    Matrix c = Matrix::Identity(2, 2);
    c(0, 1) = 0.3;
    CHECK_THROWS_AS(cdf(Vector::Zero(2), c), ValidationError);
  }
  SUBCASE("indefinite covariance names the failing minor") {
    Matrix c(3, 3);
    c << 1, 0, 0, 0, 1, 2, 0, 2, 1;
    try {
      cdf(Vector::Zero(3), c);
      FAIL("expected a factorization error");
    } catch (const FactorizationError& e) {
      CHECK(e.failing_minor() == 3);
    }
  }
  SUBCASE("infinite limits are rejected") {
    Vector a(2);
    a << std::numeric_limits<double>::infinity(), 0.0;
    CHECK_THROWS_AS(cdf(a, Matrix::Identity(2, 2)), ValidationError);
  }
}

TEST_CASE("singular covariance is rescued by jitter") {
  Matrix c(2, 2);
  c << 1, 1, 1, 1;
  const CdfEstimate e = cdf(Vector::Zero(2), c);
  CHECK(e.value == doctest::Approx(0.5).epsilon(1e-3));
}

TEST_CASE("lattice rules") {
  const LatticeRule small = lattice_rule(5000, 10);
  CHECK(small.from_table);
  CHECK(small.size >= 5000);
  const LatticeRule big = lattice_rule(5000, 500);
  CHECK_FALSE(big.from_table);
  CHECK(static_cast<Index>(big.generator.size()) == 500);
}
