#include "skewgp/errors.hpp"
#include "skewgp/harness.hpp"
#include "skewgp/normal.hpp"

#include "json.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

namespace skewgp {

using Json = nlohmann::ordered_json;

std::string to_string(ModelType t) { return t == ModelType::SkewGp ? "skewgp" : "gp-laplace"; }

ModelType model_type_from_string(const std::string& s) {
  if (s == "skewgp") return ModelType::SkewGp;
  if (s == "gp-laplace") return ModelType::GpLaplace;
  throw ValidationError("unknown model type '" + s + "' (expected skewgp or gp-laplace)");
}

ModelSpec ModelSpec::skewgp(std::string name, KernelFamily family, Index latent_dim) {
  ModelSpec m;
  m.name = std::move(name);
  m.type = ModelType::SkewGp;
  m.fit.family = family;
  m.fit.latent_dim = latent_dim;
  m.laplace.family = family;
  return m;
}

ModelSpec ModelSpec::gp_laplace(std::string name, KernelFamily family) {
  ModelSpec m;
  m.name = std::move(name);
  m.type = ModelType::GpLaplace;
  m.fit.family = family;
  m.laplace.family = family;
  return m;
}

TrainedModel train_model(const ModelSpec& spec, const TrainingSet& train, std::uint64_t seed, KernelCache* cache) {
  TrainedModel out;
  out.type = spec.type;
  out.mc_samples = spec.mc_samples;
  out.thin = spec.thin;
  out.seed = seed;
  if (spec.type == ModelType::SkewGp) {
    FitConfig config = spec.fit;
    config.seed = seed;
    if (spec.warm_start) {
      const auto hit = cache ? cache->find({spec.warm_start->name, seed}) : KernelCache::iterator{};
      if (cache && hit != cache->end()) {
        config.initial_kernel = hit->second;
      } else {
        const TrainedModel base = train_model(*spec.warm_start, train, seed, cache);
        config.initial_kernel = base.type == ModelType::SkewGp ? base.skewgp->prior().kernel : base.laplace->kernel;
      }
    }
    FitResult r = fit(train, config);
    if (cache) (*cache)[{spec.name, seed}] = r.model.prior().kernel;
    out.objective = r.objective;
    out.objective_std_error = r.objective_std_error;
    out.skewgp.emplace(std::move(r.model));
  } else {
    LaplaceHyperConfig config = spec.laplace;
    config.spsa.seed = seed;
    LaplaceFitResult r = laplace_fit_hyper(train, config);
    out.objective = r.model.log_ml;
    if (cache) (*cache)[{spec.name, seed}] = r.model.kernel;
    out.laplace.emplace(std::move(r.model));
  }
  return out;
}

Predictions predict(const TrainedModel& model, const Matrix& X_std) {
  Predictions p;
  if (model.type == ModelType::SkewGp) {
    if (!model.skewgp) throw ValidationError("predict: model holds no SkewGP posterior");
    SunSampleOptions opts;
    opts.chain.thin = model.thin;
    const ProbaResult r = predict_proba(*model.skewgp, X_std, model.mc_samples, sub_seed(model.seed, 10), opts);
    p.proba = r.proba;
    p.std_error = r.std_error;
    p.skewness = r.skewness;
    p.latent_sd = r.latent_sd;
  } else {
    if (!model.laplace) throw ValidationError("predict: model holds no Laplace approximation");
    const LaplaceLatent lat = laplace_predict_latent(*model.laplace, X_std);
    p.proba = laplace_predict_proba(*model.laplace, X_std);
    p.std_error = Vector::Zero(X_std.rows());
    p.skewness = Vector::Zero(X_std.rows());
    p.latent_sd = lat.var.cwiseSqrt();
  }
  return p;
}

// ------------------------------------------------------------- JSON I/O

namespace {

Json vec_json(const Vector& v) {
  Json a = Json::array();
  for (Index i = 0; i < v.size(); ++i) a.push_back(v(i));
  return a;
}

Json mat_json(const Matrix& m) {
  Json a = Json::array();
  for (Index i = 0; i < m.rows(); ++i) a.push_back(vec_json(m.row(i).transpose()));
  return a;
}

// JSON has no infinities; a non-finite objective is written as null.
Json num_json(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

double num_from(const Json& j) {
  return j.is_null() ? -std::numeric_limits<double>::infinity() : j.get<double>();
}

Vector vec_from(const Json& j) {
  Vector v(static_cast<Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) v(static_cast<Index>(i)) = j[i].get<double>();
  return v;
}

Matrix mat_from(const Json& j, Index cols) {
  Matrix m(static_cast<Index>(j.size()), cols);
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (static_cast<Index>(j[i].size()) != cols) throw ValidationError("model file: ragged matrix");
    for (Index c = 0; c < cols; ++c) m(static_cast<Index>(i), c) = j[i][static_cast<std::size_t>(c)].get<double>();
  }
  return m;
}

Json kernel_json(const KernelConfig& k) {
  Json j;
  j["family"] = to_string(k.family);
  j["variance"] = k.variance;
  j["lengthscales"] = vec_json(k.lengthscales);
  if (k.family == KernelFamily::NeuralNet) {
    j["bias_variance"] = k.nn_bias_variance;
    j["weight_variance"] = k.nn_weight_variance;
  }
  return j;
}

KernelConfig kernel_from(const Json& j) {
  KernelConfig k;
  k.family = kernel_family_from_string(j.at("family").get<std::string>());
  k.variance = j.at("variance").get<double>();
  k.lengthscales = vec_from(j.at("lengthscales"));
  if (k.family == KernelFamily::NeuralNet) {
    k.nn_bias_variance = j.at("bias_variance").get<double>();
    k.nn_weight_variance = j.at("weight_variance").get<double>();
  }
  k.validate();
  return k;
}

}  // namespace

std::string model_to_json(const TrainedModel& model) {
  const TrainingSet& train = model.type == ModelType::SkewGp ? model.skewgp->train() : model.laplace->train;
  Json j;
  j["schema_version"] = kModelSchemaVersion;
  j["model_type"] = to_string(model.type);
  if (model.type == ModelType::SkewGp) {
    const SkewGpPrior& prior = model.skewgp->prior();
    j["kernel"] = kernel_json(prior.kernel);
    j["latent_dim"] = prior.latent_dim();
    j["pseudo_points"] = mat_json(prior.pseudo_points);
    j["phase"] = vec_json(prior.phase);
    j["gamma"] = vec_json(prior.gamma);
  } else {
    j["kernel"] = kernel_json(model.laplace->kernel);
  }
  j["features"] = {{"names", model.feature_names},
                   {"means", vec_json(model.scaling.means)},
                   {"stds", vec_json(model.scaling.stds)}};
  j["label_column"] = model.label_column;
  Json labels = Json::array();
  for (Index i = 0; i < train.y.size(); ++i) labels.push_back(train.y(i));
  j["train"] = {{"X", mat_json(train.X)}, {"y", labels}};
  j["fit"] = {{"objective", num_json(model.objective)},
              {"objective_std_error", num_json(model.objective_std_error)},
              {"seed", model.seed}};
  j["prediction"] = {{"mc_samples", model.mc_samples}, {"thin", model.thin}};
  return j.dump(2) + "\n";
}

TrainedModel model_from_json(const std::string& text) {
  try {
    const Json j = Json::parse(text);
    if (!j.contains("schema_version")) throw ValidationError("model file: missing schema_version");
    const int version = j.at("schema_version").get<int>();
    if (version != kModelSchemaVersion) {
      throw ValidationError("model file: unsupported schema_version " + std::to_string(version));
    }
    if (!j.contains("model_type")) throw ValidationError("model file: missing model_type");
    TrainedModel m;
    m.type = model_type_from_string(j.at("model_type").get<std::string>());
    const KernelConfig kernel = kernel_from(j.at("kernel"));
    const Index p = kernel.input_dim();
    const Json& f = j.at("features");
    m.feature_names = f.at("names").get<std::vector<std::string>>();
    m.scaling.means = vec_from(f.at("means"));
    m.scaling.stds = vec_from(f.at("stds"));
    if (static_cast<Index>(m.feature_names.size()) != p || m.scaling.means.size() != p || m.scaling.stds.size() != p) {
      throw ValidationError("model file: feature statistics do not match the kernel dimension");
    }
    m.label_column = j.at("label_column").get<std::string>();
    TrainingSet train;
    train.X = mat_from(j.at("train").at("X"), p);
    const auto labels = j.at("train").at("y").get<std::vector<int>>();
    train.y = Eigen::Map<const Eigen::VectorXi>(labels.data(), static_cast<Index>(labels.size()));
    m.objective = num_from(j.at("fit").at("objective"));
    m.objective_std_error = num_from(j.at("fit").at("objective_std_error"));
    m.seed = j.at("fit").at("seed").get<std::uint64_t>();
    m.mc_samples = j.at("prediction").at("mc_samples").get<Index>();
    m.thin = j.at("prediction").at("thin").get<Index>();
    if (m.mc_samples < 1 || m.thin < 1) throw ValidationError("model file: mc_samples and thin must be positive");
    if (m.type == ModelType::SkewGp) {
      SkewGpPrior prior;
      prior.kernel = kernel;
      const Index s = j.at("latent_dim").get<Index>();
      prior.pseudo_points = mat_from(j.at("pseudo_points"), p);
      prior.phase = vec_from(j.at("phase"));
      prior.gamma = vec_from(j.at("gamma"));
      if (prior.latent_dim() != s || prior.pseudo_points.rows() != s) {
        throw ValidationError("model file: latent_dim does not match the stored parameters");
      }
      m.skewgp.emplace(prior, train);
    } else {
      m.laplace.emplace(laplace_fit(train, kernel));
    }
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("model file: ") + e.what());
  }
}

void save_model(const TrainedModel& model, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write '" + path + "'");
  out << model_to_json(model);
  if (!out) throw IoError("write error on '" + path + "'");
}

TrainedModel load_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return model_from_json(buf.str());
}

}  // namespace skewgp
