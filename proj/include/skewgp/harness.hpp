#pragma once

#include "skewgp/classifier.hpp"
#include "skewgp/fit.hpp"
#include "skewgp/laplace.hpp"
#include "skewgp/types.hpp"

#include <cstdint>
#include <iosfwd>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace skewgp {

// ---------------------------------------------------------------- datasets

/// Per-column affine map x -> (x - mean) / std.
struct Standardization {
  Vector means;
  Vector stds;

  static Standardization estimate(const Matrix& X);
  Matrix apply(const Matrix& X) const;
};

/// Binary classification data. Constant columns are removed at ingestion;
/// `X_raw` keeps the remaining columns unscaled so cross-validation can
/// estimate the scaling on training folds only.
struct Dataset {
  std::string name;
  std::vector<std::string> feature_names;
  Matrix X_raw;
  Matrix X;  // standardized with `scaling`
  Eigen::VectorXi y;
  Standardization scaling;
  std::vector<std::string> warnings;
  std::optional<Vector> latent;  // ground-truth f for synthetic data

  Index size() const { return X.rows(); }
  Index n_features() const { return X.cols(); }
  TrainingSet training_set() const { return {X, y}; }
};

/// Builds a Dataset from raw features: drops zero-variance columns (with a
/// warning) and standardizes the rest. Throws ValidationError on NaN or
/// non-binary labels.
Dataset make_dataset(std::string name, std::vector<std::string> feature_names, Matrix X_raw, Eigen::VectorXi y);

/// Header row required; every column other than `label_column` is a feature.
/// Missing files raise IoError; bad cells raise ValidationError naming the
/// data row (1-based, header excluded) and column.
Dataset load_dataset(const std::string& path, const std::string& label_column = "y");

/// Reads the named feature columns of a CSV (for prediction with a saved
/// model). The label column is returned when present.
struct FeatureTable {
  Matrix X;
  std::optional<Eigen::VectorXi> y;
};
FeatureTable load_features(const std::string& path, const std::vector<std::string>& feature_names,
                           const std::string& label_column = "y");

void write_dataset_csv(const Dataset& data, const std::string& path, const std::string& label_column = "y");

// ----------------------------------------------------------------- metrics

inline constexpr double kProbabilityClip = 1e-12;

/// Bits relative to random guessing with labels mapped to -1/+1:
///   ((y+1)/2) log2 p + ((1-y)/2) log2(1-p) + 1,  p clipped to [1e-12, 1-1e-12].
double information_score(double p_hat, int label01);
double mean_information_score(const Vector& p_hat, const Eigen::VectorXi& y);

/// Fraction of points where (p >= 0.5) equals the label.
double accuracy(const Vector& p_hat, const Eigen::VectorXi& y);

/// Argmax over per-class probability vectors; ties go to the lowest index.
Eigen::VectorXi one_vs_rest(const std::vector<Vector>& class_probabilities);

// --------------------------------------------------------- model handling

enum class ModelType { SkewGp, GpLaplace };

std::string to_string(ModelType t);
ModelType model_type_from_string(const std::string& s);

/// Everything needed to train one model on one training set.
struct ModelSpec {
  std::string name;
  ModelType type = ModelType::SkewGp;
  FitConfig fit;                // SkewGP settings; family is shared with Laplace
  LaplaceHyperConfig laplace;  // GP-Laplace settings
  Index mc_samples = 1000;
  /// Chain thinning for the posterior draws behind SkewGP predictions. The
  /// lin-ess chain is strongly autocorrelated once n reaches a few dozen.
  Index thin = 30;
  /// SkewGP only: fit this model first on the same data and seed, and start
  /// the search from its kernel.
  std::shared_ptr<const ModelSpec> warm_start;

  static ModelSpec skewgp(std::string name, KernelFamily family, Index latent_dim);
  static ModelSpec gp_laplace(std::string name, KernelFamily family);
};

/// A trained model together with the feature scaling it expects.
struct TrainedModel {
  ModelType type = ModelType::SkewGp;
  std::vector<std::string> feature_names;
  Standardization scaling;
  std::string label_column = "y";
  std::optional<PosteriorModel> skewgp;
  std::optional<LaplaceModel> laplace;
  double objective = 0.0;            // fit objective (SkewGP) or Laplace log evidence
  double objective_std_error = 0.0;
  Index mc_samples = 1000;
  Index thin = 30;
  std::uint64_t seed = 0;
};

/// Fitted kernels keyed by (model name, training seed). Valid for one
/// training set only; model names must identify their specs.
using KernelCache = std::map<std::pair<std::string, std::uint64_t>, KernelConfig>;

/// Fits on already standardized training data. With a cache, a warm start
/// reuses the base model's kernel when that model was already fitted with
/// the same seed, which gives the same result as refitting it.
TrainedModel train_model(const ModelSpec& spec, const TrainingSet& train, std::uint64_t seed,
                         KernelCache* cache = nullptr);

struct Predictions {
  Vector proba;
  Vector std_error;  // Monte Carlo error of proba (0 for GP-Laplace)
  Vector skewness;   // SS of the latent predictive (0 for GP-Laplace)
  Vector latent_sd;
};

/// `X_std` must already be standardized with the model's scaling.
Predictions predict(const TrainedModel& model, const Matrix& X_std);

/// Versioned JSON model file; see README for the layout.
inline constexpr int kModelSchemaVersion = 1;
void save_model(const TrainedModel& model, const std::string& path);
TrainedModel load_model(const std::string& path);
std::string model_to_json(const TrainedModel& model);
TrainedModel model_from_json(const std::string& text);

// ------------------------------------------------------- cross-validation

/// Stratified assignment of n points to k folds; fold sizes differ by at most
/// one and the class ratio is kept as far as rounding allows.
std::vector<IndexList> stratified_folds(const Eigen::VectorXi& y, Index k, std::uint64_t seed);

struct FoldResult {
  IndexList test_indices;
  Standardization train_scaling;  // estimated on the training rows only
  Vector proba;
  Vector skewness;
  Vector latent_sd;
  double accuracy = 0.0;
  double information = 0.0;
  double objective = 0.0;
  double fit_seconds = 0.0;
  double predict_seconds = 0.0;
};

struct CvReport {
  std::string model;
  std::string dataset;
  Index folds = 0;
  std::uint64_t seed = 0;
  std::vector<FoldResult> fold_results;
  double mean_accuracy = 0.0;
  double mean_information = 0.0;
  double ss_max = 0.0;  // largest |SS| over all held-out points
  std::optional<std::string> error;
};

/// k >= 2 and n >= k. Retries the fold assignment with new sub-seeds when a
/// training split holds a single class; gives up with ValidationError.
CvReport kfold_cv(const Dataset& data, const ModelSpec& spec, Index k, std::uint64_t seed,
                  KernelCache* cache = nullptr);

struct BenchmarkReport {
  std::vector<std::string> datasets;
  std::vector<std::string> models;
  std::vector<ModelSpec> specs;  // echoed into the report
  Index folds = 0;
  std::uint64_t seed = 0;
  std::vector<CvReport> cells;  // dataset-major
  const CvReport& cell(std::size_t dataset, std::size_t model) const {
    return cells[dataset * models.size() + model];
  }
};

/// Runs every model on every dataset. A failing cell records its error and
/// the run continues.
BenchmarkReport benchmark(const std::vector<ModelSpec>& models, const std::vector<Dataset>& datasets, Index k,
                          std::uint64_t seed);

/// Machine report. Wall-clock times are left out unless `with_timings`, so
/// the default output is reproducible byte for byte.
std::string report_to_json(const BenchmarkReport& report, bool with_timings = false);
void print_table(const BenchmarkReport& report, std::ostream& out);
/// Rows (dataset, model, baseline, ss_max, score_diff) for every model other
/// than the first, against the first.
void write_skewness_csv(const BenchmarkReport& report, std::ostream& out);

// ------------------------------------------------------- synthetic / prior

struct SyntheticConfig {
  Index n = 50;
  Index dim = 1;
  KernelConfig kernel = KernelConfig::rbf(2.0, Vector::Constant(1, 0.5));
  std::uint64_t seed = 0;
};

/// x ~ N(0, I), f ~ GP(0, k), y ~ Bernoulli(Phi(f)). Keeps f in `latent`.
Dataset generate_synthetic(const SyntheticConfig& config);

struct PriorDraws {
  Vector grid;
  Matrix f;    // n_draws x grid size
  Matrix phi;  // Phi(f)
  Vector mean_phi;
};

/// Prior sample paths on a 1-D grid.
PriorDraws sample_prior_draws(const SkewGpPrior& prior, const Vector& grid, Index n_draws, std::uint64_t seed);
void write_prior_csv(const PriorDraws& draws, std::ostream& out);

}  // namespace skewgp
