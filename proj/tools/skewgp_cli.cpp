// skewgp: command-line front end for fitting, evaluating and benchmarking
// the SkewGP classifier and the GP-Laplace baseline.

#include "skewgp/errors.hpp"
#include "skewgp/harness.hpp"

#include "CLI11.hpp"

#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>

using namespace skewgp;

namespace {

constexpr int kExitValidation = 2;
constexpr int kExitNumerical = 3;
constexpr int kExitIo = 4;

// Flags shared by the commands that train models.
struct ModelFlags {
  std::string kernel = "rbf";
  std::string model_type = "skewgp";
  Index latent_dim = 0;
  Index batch_size = 30;
  Index mc_samples = 1000;
  Index thin = 30;
  Index spsa_iters = 500;
  bool warm_start = false;
  double gp_like_gamma = 4.0;
};

void add_model_flags(CLI::App* cmd, ModelFlags& f) {
  cmd->add_option("--kernel", f.kernel, "Covariance function")->check(CLI::IsMember({"rbf", "nn"}))->capture_default_str();
  cmd->add_option("--model-type", f.model_type, "Classifier")
      ->check(CLI::IsMember({"skewgp", "gp-laplace"}))
      ->capture_default_str();
  cmd->add_option("--latent-dim", f.latent_dim, "Latent dimension s of the skew part")->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  cmd->add_option("--batch-size", f.batch_size, "Block size of the fit objective")->check(CLI::PositiveNumber)
      ->capture_default_str();
  cmd->add_option("--mc-samples", f.mc_samples, "Posterior draws per prediction")->check(CLI::PositiveNumber)
      ->capture_default_str();
  cmd->add_option("--thin", f.thin, "Chain thinning for the posterior draws")->check(CLI::PositiveNumber)
      ->capture_default_str();
  cmd->add_option("--spsa-iters", f.spsa_iters, "Hyperparameter search iterations")->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  cmd->add_flag("--warm-start", f.warm_start,
                "Start the search from a fitted s=0 model (only with --latent-dim > 0)");
}

ModelSpec base_spec(const std::string& name, ModelType type, const ModelFlags& f, Index latent_dim) {
  const KernelFamily family = kernel_family_from_string(f.kernel);
  ModelSpec m = type == ModelType::SkewGp ? ModelSpec::skewgp(name, family, latent_dim)
                                          : ModelSpec::gp_laplace(name, family);
  m.fit.batch_size = f.batch_size;
  m.fit.spsa.iterations = f.spsa_iters;
  m.laplace.spsa.iterations = f.spsa_iters;
  m.mc_samples = f.mc_samples;
  m.thin = f.thin;
  return m;
}

// The skewed model searched from the fitted s = 0 kernel, with gamma also
// tried at a large value (the nested GP model).
ModelSpec warm_spec(const std::string& name, const ModelFlags& f, Index latent_dim, const ModelSpec& base) {
  ModelSpec m = base_spec(name, ModelType::SkewGp, f, latent_dim);
  m.warm_start = std::make_shared<const ModelSpec>(base);
  m.fit.gp_like_gamma = f.gp_like_gamma;
  return m;
}

ModelSpec spec_from_flags(const ModelFlags& f) {
  const ModelType type = model_type_from_string(f.model_type);
  if (type == ModelType::GpLaplace) return base_spec("GP-L", type, f, 0);
  const std::string name = "SkewGP" + std::to_string(f.latent_dim);
  if (f.warm_start) {
    if (f.latent_dim == 0) throw ValidationError("--warm-start needs --latent-dim > 0");
    return warm_spec(name, f, f.latent_dim, base_spec("SkewGP0", ModelType::SkewGp, f, 0));
  }
  return base_spec(name, type, f, f.latent_dim);
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write '" + path + "'");
  out << text;
  if (!out) throw IoError("write error on '" + path + "'");
}

Dataset load_and_warn(const std::string& path, const std::string& label) {
  Dataset d = load_dataset(path, label);
  for (const auto& w : d.warnings) std::cerr << "warning: " << path << ": " << w << '\n';
  return d;
}

Vector parse_list(const std::string& text, const std::string& flag) {
  std::vector<double> values;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      values.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw ValidationError(flag + ": cannot parse '" + item + "' as a number");
    }
  }
  return Eigen::Map<const Vector>(values.data(), static_cast<Index>(values.size()));
}

// ------------------------------------------------------------- commands

struct FitArgs {
  std::string data;
  std::string label = "y";
  std::string out;
  std::uint64_t seed = 0;
  ModelFlags model;
};

int run_fit(const FitArgs& a) {
  const Dataset data = load_and_warn(a.data, a.label);
  const ModelSpec spec = spec_from_flags(a.model);
  TrainedModel model = train_model(spec, data.training_set(), a.seed);
  model.feature_names = data.feature_names;
  model.scaling = data.scaling;
  model.label_column = a.label;
  save_model(model, a.out);
  std::cout << spec.name << " fitted on " << data.size() << " rows, " << data.n_features()
            << " features; objective " << fmt(model.objective) << "\nmodel written to " << a.out << '\n';
  return 0;
}

struct PredictArgs {
  std::string model;
  std::string data;
  std::string out;
};

int run_predict(const PredictArgs& a) {
  const TrainedModel model = load_model(a.model);
  const FeatureTable table = load_features(a.data, model.feature_names, model.label_column);
  const Predictions p = predict(model, model.scaling.apply(table.X));
  std::ostringstream csv;
  csv << "p,std_error,skewness,latent_sd\n";
  for (Index i = 0; i < p.proba.size(); ++i) {
    csv << fmt(p.proba(i)) << ',' << fmt(p.std_error(i)) << ',' << fmt(p.skewness(i)) << ',' << fmt(p.latent_sd(i))
        << '\n';
  }
  if (a.out.empty()) {
    std::cout << csv.str();
  } else {
    write_text(a.out, csv.str());
  }
  if (table.y) {
    std::cerr << "accuracy " << fmt(accuracy(p.proba, *table.y)) << "  information (bits) "
              << fmt(mean_information_score(p.proba, *table.y)) << '\n';
  }
  return 0;
}

struct EvalArgs {
  std::vector<std::string> data;
  std::string label = "y";
  std::string out;
  std::string csv;
  std::vector<std::string> models;
  Index folds = 5;
  std::uint64_t seed = 0;
  bool timings = false;
  ModelFlags model;
};

int report(const BenchmarkReport& r, const EvalArgs& a) {
  print_table(r, std::cout);
  if (!a.out.empty()) write_text(a.out, report_to_json(r, a.timings));
  if (!a.csv.empty()) {
    std::ostringstream csv;
    write_skewness_csv(r, csv);
    write_text(a.csv, csv.str());
  }
  for (const auto& c : r.cells) {
    if (c.error) return kExitNumerical;
  }
  return 0;
}

int run_eval(const EvalArgs& a) {
  const Dataset data = load_and_warn(a.data.front(), a.label);
  const ModelSpec spec = spec_from_flags(a.model);
  // Same layout and seeding as a one-cell benchmark, but errors propagate
  // so the exit code reflects them.
  BenchmarkReport r;
  r.datasets = {data.name};
  r.models = {spec.name};
  r.specs = {spec};
  r.folds = a.folds;
  r.seed = a.seed;
  KernelCache cache;
  r.cells.push_back(kfold_cv(data, spec, a.folds, sub_seed(a.seed, 0), &cache));
  return report(r, a);
}

int run_benchmark(const EvalArgs& a) {
  std::vector<Dataset> datasets;
  for (const auto& path : a.data) datasets.push_back(load_and_warn(path, a.label));
  const ModelSpec skew0 = base_spec("SkewGP0", ModelType::SkewGp, a.model, 0);
  std::vector<ModelSpec> specs;
  for (const auto& name : a.models) {
    if (name == "SkewGP0") {
      specs.push_back(skew0);
    } else if (name == "SkewGP2") {
      specs.push_back(warm_spec("SkewGP2", a.model, 2, skew0));
    } else if (name == "GP-L") {
      specs.push_back(base_spec("GP-L", ModelType::GpLaplace, a.model, 0));
    } else {
      throw ValidationError("unknown model '" + name + "' (expected SkewGP0, SkewGP2 or GP-L)");
    }
  }
  return report(benchmark(specs, datasets, a.folds, a.seed), a);
}

struct SynthArgs {
  Index n = 50;
  Index dim = 1;
  double variance = 2.0;
  double lengthscale = 0.5;
  std::uint64_t seed = 0;
  std::string label = "y";
  std::string out;
  std::string latent_out;
};

int run_synth(const SynthArgs& a) {
  SyntheticConfig cfg;
  cfg.n = a.n;
  cfg.dim = a.dim;
  cfg.kernel = KernelConfig::rbf(a.variance, Vector::Constant(1, a.lengthscale));
  cfg.seed = a.seed;
  const Dataset d = generate_synthetic(cfg);
  write_dataset_csv(d, a.out, a.label);
  if (!a.latent_out.empty()) {
    std::ostringstream csv;
    csv << "f\n";
    for (Index i = 0; i < d.latent->size(); ++i) csv << fmt((*d.latent)(i)) << '\n';
    write_text(a.latent_out, csv.str());
  }
  std::cout << "wrote " << d.size() << " rows (" << d.y.sum() << " positive) to " << a.out << '\n';
  return 0;
}

struct PriorArgs {
  std::string kernel = "rbf";
  double variance = 1.0;
  double lengthscale = 0.3;
  std::string pseudo_points;
  std::string phase;
  std::string gamma;
  double grid_min = -3.0;
  double grid_max = 3.0;
  Index grid_points = 101;
  Index draws = 5;
  std::uint64_t seed = 0;
  std::string out;
};

int run_sample_prior(const PriorArgs& a) {
  SkewGpPrior prior;
  const Vector ls = Vector::Constant(1, a.lengthscale);
  prior.kernel = a.kernel == "nn" ? KernelConfig::neural_net(a.variance, ls, 1.0, 1.0) : KernelConfig::rbf(a.variance, ls);
  const Vector r = a.pseudo_points.empty() ? Vector(0) : parse_list(a.pseudo_points, "--pseudo-points");
  prior.pseudo_points = r;
  prior.phase = a.phase.empty() ? Vector(Vector::Ones(r.size())) : parse_list(a.phase, "--phase");
  prior.gamma = a.gamma.empty() ? Vector(Vector::Zero(r.size())) : parse_list(a.gamma, "--gamma");
  if (prior.phase.size() != r.size() || prior.gamma.size() != r.size()) {
    throw ValidationError("--pseudo-points, --phase and --gamma must have the same length");
  }
  if (a.grid_points < 2 || !(a.grid_max > a.grid_min)) {
    throw ValidationError("the grid needs at least two points and --grid-max > --grid-min");
  }
  prior.validate();
  const Vector grid = Vector::LinSpaced(a.grid_points, a.grid_min, a.grid_max);
  const PriorDraws draws = sample_prior_draws(prior, grid, a.draws, a.seed);
  std::ostringstream csv;
  write_prior_csv(draws, csv);
  if (a.out.empty()) {
    std::cout << csv.str();
  } else {
    write_text(a.out, csv.str());
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"SkewGP binary classification: fit, predict, evaluate and benchmark"};
  app.require_subcommand(1);

  FitArgs fit_args;
  auto* fit_cmd = app.add_subcommand("fit", "Fit a model on a CSV dataset and save it as JSON");
  fit_cmd->add_option("--data", fit_args.data, "Training CSV")->required();
  fit_cmd->add_option("--label", fit_args.label, "Label column")->capture_default_str();
  fit_cmd->add_option("--out,--model", fit_args.out, "Model file to write")->required();
  fit_cmd->add_option("--seed", fit_args.seed, "Random seed")->capture_default_str();
  add_model_flags(fit_cmd, fit_args.model);

  PredictArgs predict_args;
  auto* predict_cmd = app.add_subcommand("predict", "Predict class-1 probabilities with a saved model");
  predict_cmd->add_option("--model", predict_args.model, "Model file")->required();
  predict_cmd->add_option("--data", predict_args.data, "CSV with the model's feature columns")->required();
  predict_cmd->add_option("--out", predict_args.out, "Output CSV (default: standard output)");

  EvalArgs eval_args;
  auto* eval_cmd = app.add_subcommand("eval", "Stratified k-fold cross-validation of one model");
  eval_cmd->add_option("--data", eval_args.data, "Dataset CSV")->required()->expected(1);
  eval_cmd->add_option("--label", eval_args.label, "Label column")->capture_default_str();
  eval_cmd->add_option("--folds", eval_args.folds, "Number of folds")->check(CLI::Range(2, 1000000))
      ->capture_default_str();
  eval_cmd->add_option("--seed", eval_args.seed, "Random seed")->capture_default_str();
  eval_cmd->add_option("--out", eval_args.out, "JSON report");
  eval_cmd->add_flag("--timings", eval_args.timings, "Include wall-clock times in the JSON report");
  add_model_flags(eval_cmd, eval_args.model);

  EvalArgs bench_args;
  bench_args.models = {"SkewGP0", "SkewGP2", "GP-L"};
  auto* bench_cmd = app.add_subcommand("benchmark", "Cross-validate several models on several datasets");
  bench_cmd->add_option("--data", bench_args.data, "Dataset CSVs")->required();
  bench_cmd->add_option("--label", bench_args.label, "Label column")->capture_default_str();
  bench_cmd->add_option("--models", bench_args.models, "Models to compare: SkewGP0, SkewGP2, GP-L")
      ->delimiter(',')
      ->capture_default_str();
  bench_cmd->add_option("--folds", bench_args.folds, "Number of folds")->check(CLI::Range(2, 1000000))
      ->capture_default_str();
  bench_cmd->add_option("--seed", bench_args.seed, "Random seed")->capture_default_str();
  bench_cmd->add_option("--out", bench_args.out, "JSON report");
  bench_cmd->add_option("--csv", bench_args.csv, "CSV of (SS max, score difference) against the first model");
  bench_cmd->add_flag("--timings", bench_args.timings, "Include wall-clock times in the JSON report");
  add_model_flags(bench_cmd, bench_args.model);

  SynthArgs synth_args;
  auto* synth_cmd = app.add_subcommand("synth", "Generate probit-GP synthetic classification data");
  synth_cmd->add_option("--n", synth_args.n, "Number of points")->capture_default_str();
  synth_cmd->add_option("--dim", synth_args.dim, "Input dimension")->capture_default_str();
  synth_cmd->add_option("--variance", synth_args.variance, "RBF variance")->capture_default_str();
  synth_cmd->add_option("--lengthscale", synth_args.lengthscale, "RBF lengthscale")->capture_default_str();
  synth_cmd->add_option("--seed", synth_args.seed, "Random seed")->capture_default_str();
  synth_cmd->add_option("--label", synth_args.label, "Label column name")->capture_default_str();
  synth_cmd->add_option("--out", synth_args.out, "Output CSV")->required();
  synth_cmd->add_option("--latent-out", synth_args.latent_out, "Also write the latent function values here");

  PriorArgs prior_args;
  auto* prior_cmd = app.add_subcommand("sample-prior", "Draw SkewGP prior sample paths on a 1-D grid");
  prior_cmd->add_option("--kernel", prior_args.kernel, "Covariance function")->check(CLI::IsMember({"rbf", "nn"}))
      ->capture_default_str();
  prior_cmd->add_option("--variance", prior_args.variance, "Kernel variance")->capture_default_str();
  prior_cmd->add_option("--lengthscale", prior_args.lengthscale, "Kernel lengthscale")->capture_default_str();
  prior_cmd->add_option("--pseudo-points", prior_args.pseudo_points, "Comma-separated pseudo-point locations");
  prior_cmd->add_option("--phase", prior_args.phase, "Comma-separated signs, one per pseudo-point (default +1)");
  prior_cmd->add_option("--gamma", prior_args.gamma, "Comma-separated truncation levels (default 0)");
  prior_cmd->add_option("--grid-min", prior_args.grid_min, "Grid start")->capture_default_str();
  prior_cmd->add_option("--grid-max", prior_args.grid_max, "Grid end")->capture_default_str();
  prior_cmd->add_option("--grid-points", prior_args.grid_points, "Grid size")->capture_default_str();
  prior_cmd->add_option("--draws", prior_args.draws, "Number of sample paths")->check(CLI::PositiveNumber)
      ->capture_default_str();
  prior_cmd->add_option("--seed", prior_args.seed, "Random seed")->capture_default_str();
  prior_cmd->add_option("--out", prior_args.out, "Output CSV (default: standard output)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitValidation;
  }

  try {
    if (*fit_cmd) return run_fit(fit_args);
    if (*predict_cmd) return run_predict(predict_args);
    if (*eval_cmd) return run_eval(eval_args);
    if (*bench_cmd) return run_benchmark(bench_args);
    if (*synth_cmd) return run_synth(synth_args);
    if (*prior_cmd) return run_sample_prior(prior_args);
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const NumericalError& e) {
    std::cerr << "numerical error: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const IoError& e) {
    std::cerr << "I/O error: " << e.what() << '\n';
    return kExitIo;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitNumerical;
  }
  return 0;
}
