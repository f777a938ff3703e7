#pragma once

#include "skewgp/classifier.hpp"
#include "skewgp/spsa.hpp"

#include <optional>
#include <vector>

namespace skewgp {

enum class FitObjective {
  /// Sum of per-block log marginal likelihoods. Equals the exact log marginal
  /// likelihood when a single block covers the data.
  BlockComposite,
  /// The Frechet lower bound; -infinity whenever it is vacuous.
  FrechetBound,
};

struct FitConfig {
  KernelFamily family = KernelFamily::Rbf;
  Index latent_dim = 0;
  Index batch_size = 30;
  FitObjective objective = FitObjective::BlockComposite;
  SpsaOptions spsa;
  Index restarts = 1;
  /// Orthant accuracy while searching, and for the reported final objective.
  OrthantOptions search_orthant{1000, 8, 0, true};
  OrthantOptions final_orthant{};
  /// Starting kernel; defaults to unit variance and unit lengthscales.
  std::optional<KernelConfig> initial_kernel;
  /// Extra starting value for every gamma entry, tried next to gamma = 0. A
  /// large value starts the search at the nested Gaussian-process model.
  std::optional<double> gp_like_gamma;
  Index init_redraws = 10;
  std::uint64_t seed = 0;
};

struct FitResult {
  PosteriorModel model;
  double objective = 0.0;
  double objective_std_error = 0.0;
  BatchPartition partition;
  std::vector<double> trace_value;
  std::vector<double> trace_best;
  Index n_evaluations = 0;
};

/// Objective used by fit() for a given prior.
LogEstimate fit_objective(const SkewGpPrior& prior, const TrainingSet& train, const BatchPartition& partition,
                          FitObjective kind, const OrthantOptions& opts);

/// Maximizes the configured objective over log kernel hyperparameters,
/// pseudo-points, gamma and (exhaustively for s <= 4) the phase signs.
FitResult fit(const TrainingSet& train, const FitConfig& config);

}  // namespace skewgp
