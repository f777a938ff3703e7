#include "skewgp/errors.hpp"
#include "skewgp/harness.hpp"

#include <algorithm>
#include <cmath>

namespace skewgp {

double information_score(double p_hat, int label01) {
  if (!(p_hat >= 0.0 && p_hat <= 1.0)) throw ValidationError("information score: probability outside [0, 1]");
  if (label01 != 0 && label01 != 1) throw ValidationError("information score: label must be 0 or 1");
  const double p = std::clamp(p_hat, kProbabilityClip, 1.0 - kProbabilityClip);
  const double y = 2.0 * label01 - 1.0;
  return 0.5 * (y + 1.0) * std::log2(p) + 0.5 * (1.0 - y) * std::log2(1.0 - p) + 1.0;
}

double mean_information_score(const Vector& p_hat, const Eigen::VectorXi& y) {
  if (p_hat.size() != y.size() || y.size() == 0) throw ValidationError("information score: length mismatch");
  double total = 0.0;
  for (Index i = 0; i < y.size(); ++i) total += information_score(p_hat(i), y(i));
  return total / static_cast<double>(y.size());
}

double accuracy(const Vector& p_hat, const Eigen::VectorXi& y) {
  if (p_hat.size() != y.size() || y.size() == 0) throw ValidationError("accuracy: length mismatch");
  Index hits = 0;
  for (Index i = 0; i < y.size(); ++i) hits += (p_hat(i) >= 0.5 ? 1 : 0) == y(i);
  return static_cast<double>(hits) / static_cast<double>(y.size());
}

Eigen::VectorXi one_vs_rest(const std::vector<Vector>& class_probabilities) {
  if (class_probabilities.empty()) throw ValidationError("one-vs-rest: no classes");
  const Index n = class_probabilities.front().size();
  for (const Vector& p : class_probabilities) {
    if (p.size() != n) throw ValidationError("one-vs-rest: probability vectors differ in length");
  }
  Eigen::VectorXi out = Eigen::VectorXi::Zero(n);
  for (Index i = 0; i < n; ++i) {
    double best = class_probabilities[0](i);
    for (std::size_t c = 1; c < class_probabilities.size(); ++c) {
      if (class_probabilities[c](i) > best) {
        best = class_probabilities[c](i);
        out(i) = static_cast<int>(c);
      }
    }
  }
  return out;
}

}  // namespace skewgp
