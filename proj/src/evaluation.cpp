#include "skewgp/errors.hpp"
#include "skewgp/harness.hpp"
#include "skewgp/normal.hpp"

#include "json.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <ostream>

namespace skewgp {

using Json = nlohmann::ordered_json;

std::vector<IndexList> stratified_folds(const Eigen::VectorXi& y, Index k, std::uint64_t seed) {
  const Index n = y.size();
  if (k < 2) throw ValidationError("cross-validation: need at least 2 folds");
  if (n < k) throw ValidationError("cross-validation: fewer points than folds");
  IndexList ones;
  IndexList zeros;
  for (Index i = 0; i < n; ++i) (y(i) == 1 ? ones : zeros).push_back(i);
  Rng rng(seed);
  std::shuffle(ones.begin(), ones.end(), rng);
  std::shuffle(zeros.begin(), zeros.end(), rng);
  // Dealing the classes one after the other round-robin keeps both the fold
  // sizes and the per-fold class counts within one of each other.
  IndexList order = ones;
  order.insert(order.end(), zeros.begin(), zeros.end());
  std::vector<IndexList> folds(static_cast<std::size_t>(k));
  for (std::size_t j = 0; j < order.size(); ++j) folds[j % static_cast<std::size_t>(k)].push_back(order[j]);
  for (auto& f : folds) std::sort(f.begin(), f.end());
  return folds;
}

namespace {

constexpr int kFoldRetries = 10;

bool both_classes(const Eigen::VectorXi& y, const IndexList& rows) {
  bool zero = false;
  bool one = false;
  for (Index i : rows) (y(i) == 1 ? one : zero) = true;
  return zero && one;
}

IndexList complement(Index n, const IndexList& sorted_rows) {
  IndexList out;
  std::size_t j = 0;
  for (Index i = 0; i < n; ++i) {
    if (j < sorted_rows.size() && sorted_rows[j] == i) {
      ++j;
    } else {
      out.push_back(i);
    }
  }
  return out;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace

CvReport kfold_cv(const Dataset& data, const ModelSpec& spec, Index k, std::uint64_t seed, KernelCache* cache) {
  const Index n = data.size();
  std::vector<IndexList> folds;
  for (int attempt = 0; attempt < kFoldRetries; ++attempt) {
    folds = stratified_folds(data.y, k, sub_seed(seed, static_cast<std::uint64_t>(attempt)));
    const bool ok = std::all_of(folds.begin(), folds.end(),
                                [&](const IndexList& f) { return both_classes(data.y, complement(n, f)); });
    if (ok) break;
    if (attempt + 1 == kFoldRetries) {
      throw ValidationError("cross-validation: a training split holds a single class after " +
                            std::to_string(kFoldRetries) + " fold assignments");
    }
  }

  CvReport report;
  report.model = spec.name;
  report.dataset = data.name;
  report.folds = k;
  report.seed = seed;
  Vector all_p = Vector::Zero(n);
  for (std::size_t f = 0; f < folds.size(); ++f) {
    FoldResult r;
    r.test_indices = folds[f];
    const IndexList train_rows = complement(n, folds[f]);
    // Scaling comes from the training rows only.
    const Matrix raw_train = data.X_raw(train_rows, Eigen::all);
    r.train_scaling = Standardization::estimate(raw_train);
    const TrainingSet train{r.train_scaling.apply(raw_train), data.y(train_rows)};
    const Matrix X_test = r.train_scaling.apply(data.X_raw(folds[f], Eigen::all));
    const Eigen::VectorXi y_test = data.y(folds[f]);

    auto t0 = std::chrono::steady_clock::now();
    const TrainedModel model = train_model(spec, train, sub_seed(seed, 1000 + f), cache);
    r.fit_seconds = seconds_since(t0);
    t0 = std::chrono::steady_clock::now();
    const Predictions p = predict(model, X_test);
    r.predict_seconds = seconds_since(t0);

    r.proba = p.proba;
    r.skewness = p.skewness;
    r.latent_sd = p.latent_sd;
    r.accuracy = accuracy(p.proba, y_test);
    r.information = mean_information_score(p.proba, y_test);
    r.objective = model.objective;
    for (std::size_t i = 0; i < folds[f].size(); ++i) all_p(folds[f][i]) = p.proba(static_cast<Index>(i));
    if (p.skewness.size() > 0) report.ss_max = std::max(report.ss_max, p.skewness.cwiseAbs().maxCoeff());
    report.fold_results.push_back(std::move(r));
  }
  report.mean_accuracy = accuracy(all_p, data.y);
  report.mean_information = mean_information_score(all_p, data.y);
  return report;
}

BenchmarkReport benchmark(const std::vector<ModelSpec>& models, const std::vector<Dataset>& datasets, Index k,
                          std::uint64_t seed) {
  if (models.empty()) throw ValidationError("benchmark: no models");
  if (datasets.empty()) throw ValidationError("benchmark: no datasets");
  BenchmarkReport out;
  out.folds = k;
  out.seed = seed;
  out.specs = models;
  for (const auto& m : models) {
    if (std::find(out.models.begin(), out.models.end(), m.name) != out.models.end()) {
      throw ValidationError("benchmark: duplicate model name '" + m.name + "'");
    }
    out.models.push_back(m.name);
  }
  for (const auto& d : datasets) out.datasets.push_back(d.name);
  for (std::size_t d = 0; d < datasets.size(); ++d) {
    KernelCache cache;  // fold seeds repeat across models but not across datasets
    for (const auto& m : models) {
      // Every model on a dataset sees the same folds and training seeds.
      const std::uint64_t cell_seed = sub_seed(seed, d);
      try {
        out.cells.push_back(kfold_cv(datasets[d], m, k, cell_seed, &cache));
      } catch (const Error& e) {
        CvReport failed;
        failed.model = m.name;
        failed.dataset = datasets[d].name;
        failed.folds = k;
        failed.seed = cell_seed;
        failed.error = e.what();
        out.cells.push_back(std::move(failed));
      }
    }
  }
  return out;
}

namespace {

Json vec_json(const Vector& v) {
  Json a = Json::array();
  for (Index i = 0; i < v.size(); ++i) a.push_back(v(i));
  return a;
}

Json num_json(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

Json spec_json(const ModelSpec& m) {
  Json j;
  j["name"] = m.name;
  j["model_type"] = to_string(m.type);
  j["kernel"] = to_string(m.type == ModelType::SkewGp ? m.fit.family : m.laplace.family);
  if (m.type == ModelType::SkewGp) {
    j["latent_dim"] = m.fit.latent_dim;
    j["batch_size"] = m.fit.batch_size;
    j["objective"] = m.fit.objective == FitObjective::BlockComposite ? "block-composite" : "frechet-bound";
    j["spsa_iterations"] = m.fit.spsa.iterations;
    j["mc_samples"] = m.mc_samples;
    j["thin"] = m.thin;
    j["warm_start"] = m.warm_start ? Json(m.warm_start->name) : Json(nullptr);
  } else {
    j["spsa_iterations"] = m.laplace.spsa.iterations;
  }
  return j;
}

}  // namespace

std::string report_to_json(const BenchmarkReport& report, bool with_timings) {
  Json j;
  j["schema_version"] = 1;
  j["folds"] = report.folds;
  j["seed"] = report.seed;
  j["datasets"] = report.datasets;
  Json models = Json::array();
  for (const auto& m : report.specs) models.push_back(spec_json(m));
  j["models"] = models;
  Json results = Json::array();
  for (const CvReport& c : report.cells) {
    Json r;
    r["dataset"] = c.dataset;
    r["model"] = c.model;
    r["seed"] = c.seed;
    if (c.error) {
      r["status"] = "failed";
      r["error"] = *c.error;
      results.push_back(r);
      continue;
    }
    r["status"] = "ok";
    r["accuracy"] = c.mean_accuracy;
    r["information"] = c.mean_information;
    r["ss_max"] = c.ss_max;
    Json folds = Json::array();
    for (std::size_t f = 0; f < c.fold_results.size(); ++f) {
      const FoldResult& fr = c.fold_results[f];
      Json fj;
      fj["fold"] = f;
      fj["test_indices"] = fr.test_indices;
      fj["accuracy"] = fr.accuracy;
      fj["information"] = fr.information;
      fj["objective"] = num_json(fr.objective);
      fj["train_means"] = vec_json(fr.train_scaling.means);
      fj["train_stds"] = vec_json(fr.train_scaling.stds);
      fj["proba"] = vec_json(fr.proba);
      fj["skewness"] = vec_json(fr.skewness);
      fj["latent_sd"] = vec_json(fr.latent_sd);
      if (with_timings) {
        fj["fit_seconds"] = fr.fit_seconds;
        fj["predict_seconds"] = fr.predict_seconds;
      }
      folds.push_back(fj);
    }
    r["folds"] = folds;
    results.push_back(r);
  }
  j["results"] = results;
  return j.dump(2) + "\n";
}

void print_table(const BenchmarkReport& report, std::ostream& out) {
  char line[256];
  std::snprintf(line, sizeof line, "%-24s %-12s %9s %12s %8s %10s\n", "dataset", "model", "accuracy", "info (bits)",
                "SS max", "time (s)");
  out << line;
  for (const CvReport& c : report.cells) {
    if (c.error) {
      std::snprintf(line, sizeof line, "%-24s %-12s FAILED: ", c.dataset.c_str(), c.model.c_str());
      out << line << *c.error << '\n';
      continue;
    }
    double t = 0.0;
    for (const auto& f : c.fold_results) t += f.fit_seconds + f.predict_seconds;
    std::snprintf(line, sizeof line, "%-24s %-12s %9.4f %12.4f %8.3f %10.2f\n", c.dataset.c_str(), c.model.c_str(),
                  c.mean_accuracy, c.mean_information, c.ss_max, t);
    out << line;
  }
}

void write_skewness_csv(const BenchmarkReport& report, std::ostream& out) {
  out << "dataset,model,baseline,ss_max,score_diff\n";
  char buf[64];
  for (std::size_t d = 0; d < report.datasets.size(); ++d) {
    const CvReport& base = report.cell(d, 0);
    if (base.error) continue;
    for (std::size_t m = 1; m < report.models.size(); ++m) {
      const CvReport& c = report.cell(d, m);
      if (c.error) continue;
      std::snprintf(buf, sizeof buf, "%.17g,%.17g", c.ss_max, c.mean_information - base.mean_information);
      out << report.datasets[d] << ',' << c.model << ',' << base.model << ',' << buf << '\n';
    }
  }
}

}  // namespace skewgp
