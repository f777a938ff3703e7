#pragma once

#include "skewgp/types.hpp"

#include <cstdint>
#include <vector>

namespace skewgp {

/// Accuracy/cost knobs for orthant probabilities, threaded through every
/// operation that evaluates a Gaussian CDF.
struct OrthantOptions {
  int n_points = 5000;  // lattice size per random shift
  int n_shifts = 12;    // independent shifts, used for the error estimate
  std::uint64_t seed = 0;
  bool reorder = true;
};

struct CdfRequest {
  Vector upper;
  Matrix cov;
  int n_points = 5000;
  int n_shifts = 12;
  std::uint64_t seed = 0;
};

struct CdfEstimate {
  double value = 1.0;
  double std_error = 0.0;
  double log_value = 0.0;

  /// std_error / value, kept separately so it survives underflow of value.
  double relative_error = 0.0;
};

/// P(X <= upper) for X ~ N(0, cov), by the separation-of-variables transform
/// integrated with a randomly shifted rank-1 lattice rule (tent-periodized).
/// Deterministic given the seed. The zero-dimensional CDF is exactly 1.
CdfEstimate mvn_cdf(const CdfRequest& req, bool reorder = true);

CdfEstimate orthant_probability(const Vector& upper, const Matrix& cov, const OrthantOptions& opts = {});

/// Greedy ordering that integrates the variable with the smallest expected
/// conditional mass first. Ties go to the lower original index.
IndexList variable_reordering(const Matrix& cov, const Vector& upper);

struct LatticeRule {
  int size = 0;
  std::vector<int> generator;
  bool from_table = false;
};

/// Rank-1 lattice with at least `n_points` points in `dim` dimensions. Uses the
/// embedded component-by-component table when possible and a Korobov rule
/// otherwise.
LatticeRule lattice_rule(int n_points, int dim);

}  // namespace skewgp
