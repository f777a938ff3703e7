#pragma once

#include "skewgp/types.hpp"

#include <cstdint>
#include <random>

namespace skewgp {

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kLogSqrt2Pi = 0.91893853320467274178;

double normal_pdf(double x);
double normal_log_pdf(double x);
double normal_cdf(double x);
/// log Phi(x), accurate far into the lower tail.
double normal_log_cdf(double x);
/// Inverse of the standard normal CDF (Wichura, AS 241). Returns -inf / +inf
/// at 0 / 1.
double normal_quantile(double p);

/// Log density of N(mean, cov) at x given the Cholesky factor of cov.
double mvn_log_pdf(const Vector& x, const Vector& mean, const Eigen::LLT<Matrix>& cov_llt);

/// Deterministic 64-bit mixing used to derive independent sub-seeds.
std::uint64_t splitmix64(std::uint64_t x);
std::uint64_t sub_seed(std::uint64_t seed, std::uint64_t stream);

using Rng = std::mt19937_64;

/// Vector of iid standard normal draws.
Vector standard_normal(Rng& rng, Index n);

}  // namespace skewgp
