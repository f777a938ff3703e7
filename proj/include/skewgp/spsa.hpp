#pragma once

#include "skewgp/types.hpp"

#include <cstdint>
#include <functional>
#include <vector>

namespace skewgp {

/// Simultaneous perturbation stochastic approximation (maximization) with
/// gains a_k = a / (k + A)^alpha and c_k = c / k^gamma.
struct SpsaOptions {
  Index iterations = 500;
  double a = 0.0;          // <= 0: calibrated from a gradient probe
  double c = 0.1;
  double A = -1.0;         // < 0: 10% of the iteration budget
  double alpha = 0.602;
  double gamma = 0.101;
  double target_step = 0.2;  // first-step size per coordinate used to calibrate a
  double max_step = 1.0;     // per-coordinate step clip
  Index calibration_probes = 4;
  std::uint64_t seed = 0;
};

struct SpsaResult {
  Vector best_x;
  double best_value = 0.0;
  Vector final_x;
  std::vector<double> trace_value;  // value at the current iterate after each step
  std::vector<double> trace_best;   // best value seen so far (non-decreasing)
  Index n_evaluations = 0;
};

using Objective = std::function<double(const Vector&)>;

/// Non-finite objective values count as -infinity. The incumbent is the best
/// point evaluated, including the perturbation probes.
SpsaResult spsa_maximize(const Objective& f, const Vector& x0, const SpsaOptions& opts);

}  // namespace skewgp
