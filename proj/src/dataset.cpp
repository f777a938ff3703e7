#include "skewgp/errors.hpp"
#include "skewgp/harness.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace skewgp {
namespace {

std::string trim(std::string_view s) {
  std::size_t a = 0;
  std::size_t b = s.size();
  while (a < b && (s[a] == ' ' || s[a] == '\t' || s[a] == '\r')) ++a;
  while (b > a && (s[b - 1] == ' ' || s[b - 1] == '\t' || s[b - 1] == '\r')) --b;
  std::string out(s.substr(a, b - a));
  if (out.size() >= 2 && out.front() == '"' && out.back() == '"') out = out.substr(1, out.size() - 2);
  return out;
}

std::vector<std::string> split_row(const std::string& line) {
  std::vector<std::string> cells;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    cells.push_back(trim(std::string_view(line).substr(start, comma == std::string::npos ? std::string::npos : comma - start)));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return cells;
}

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

CsvTable read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path + "'");
  CsvTable t;
  std::string line;
  if (!std::getline(in, line)) throw ValidationError(path + ": missing header row");
  t.header = split_row(line);
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    auto cells = split_row(line);
    if (cells.size() != t.header.size()) {
      throw ValidationError(path + ": row " + std::to_string(t.rows.size() + 1) + " has " +
                            std::to_string(cells.size()) + " cells, expected " + std::to_string(t.header.size()));
    }
    t.rows.push_back(std::move(cells));
  }
  if (in.bad()) throw IoError("read error on '" + path + "'");
  return t;
}

double parse_cell(const std::string& cell, const std::string& path, std::size_t row, const std::string& column) {
  double v = 0.0;
  const char* end = cell.data() + cell.size();
  const auto res = std::from_chars(cell.data(), end, v);
  if (cell.empty() || res.ec != std::errc() || res.ptr != end || !std::isfinite(v)) {
    throw ValidationError(path + ": cannot parse '" + cell + "' at row " + std::to_string(row + 1) + ", column '" +
                          column + "'");
  }
  return v;
}

int parse_label(const std::string& cell, const std::string& path, std::size_t row, const std::string& column) {
  const double v = parse_cell(cell, path, row, column);
  if (v != 0.0 && v != 1.0) {
    throw ValidationError(path + ": label '" + cell + "' at row " + std::to_string(row + 1) + ", column '" + column +
                          "' is not 0 or 1");
  }
  return static_cast<int>(v);
}

std::size_t column_index(const CsvTable& t, const std::string& name, const std::string& path) {
  for (std::size_t j = 0; j < t.header.size(); ++j) {
    if (t.header[j] == name) return j;
  }
  throw ValidationError(path + ": missing column '" + name + "'");
}

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

Standardization Standardization::estimate(const Matrix& X) {
  if (X.rows() < 1) throw ValidationError("standardization: no rows");
  Standardization s;
  s.means = X.colwise().mean().transpose();
  s.stds = Vector(X.cols());
  for (Index j = 0; j < X.cols(); ++j) {
    const double ss = (X.col(j).array() - s.means(j)).square().sum();
    s.stds(j) = X.rows() > 1 ? std::sqrt(ss / static_cast<double>(X.rows() - 1)) : 0.0;
  }
  return s;
}

Matrix Standardization::apply(const Matrix& X) const {
  if (X.cols() != means.size()) throw ValidationError("standardization: column count mismatch");
  Matrix out = X.rowwise() - means.transpose();
  for (Index j = 0; j < out.cols(); ++j) {
    // A zero spread (single-row training folds) leaves the column centred only.
    if (stds(j) > 0.0) out.col(j) /= stds(j);
  }
  return out;
}

Dataset make_dataset(std::string name, std::vector<std::string> feature_names, Matrix X_raw, Eigen::VectorXi y) {
  if (static_cast<Index>(feature_names.size()) != X_raw.cols()) {
    throw ValidationError("dataset: feature name count does not match the column count");
  }
  if (y.size() != X_raw.rows()) throw ValidationError("dataset: label count does not match the row count");
  if (!X_raw.allFinite()) throw ValidationError("dataset: non-finite feature value");
  for (Index i = 0; i < y.size(); ++i) {
    if (y(i) != 0 && y(i) != 1) throw ValidationError("dataset: labels must be 0 or 1");
  }
  Dataset d;
  d.name = std::move(name);
  d.y = std::move(y);
  const Standardization all = Standardization::estimate(X_raw);
  std::vector<Index> keep;
  for (Index j = 0; j < X_raw.cols(); ++j) {
    if (all.stds(j) > 0.0) {
      keep.push_back(j);
      d.feature_names.push_back(feature_names[static_cast<std::size_t>(j)]);
    } else {
      d.warnings.push_back("dropping constant column '" + feature_names[static_cast<std::size_t>(j)] + "'");
    }
  }
  if (keep.empty()) throw ValidationError("dataset: every feature column is constant");
  d.X_raw = X_raw(Eigen::all, keep);
  d.scaling = Standardization::estimate(d.X_raw);
  d.X = d.scaling.apply(d.X_raw);
  return d;
}

Dataset load_dataset(const std::string& path, const std::string& label_column) {
  const CsvTable t = read_csv(path);
  const std::size_t label = column_index(t, label_column, path);
  std::vector<std::string> names;
  for (std::size_t j = 0; j < t.header.size(); ++j) {
    if (j != label) names.push_back(t.header[j]);
  }
  if (names.empty()) throw ValidationError(path + ": no feature columns");
  if (t.rows.empty()) throw ValidationError(path + ": no data rows");
  Matrix X(static_cast<Index>(t.rows.size()), static_cast<Index>(names.size()));
  Eigen::VectorXi y(static_cast<Index>(t.rows.size()));
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    Index c = 0;
    for (std::size_t j = 0; j < t.header.size(); ++j) {
      if (j == label) {
        y(static_cast<Index>(i)) = parse_label(t.rows[i][j], path, i, t.header[j]);
      } else {
        X(static_cast<Index>(i), c++) = parse_cell(t.rows[i][j], path, i, t.header[j]);
      }
    }
  }
  std::string name = path;
  if (const auto slash = name.find_last_of('/'); slash != std::string::npos) name = name.substr(slash + 1);
  return make_dataset(name, std::move(names), std::move(X), std::move(y));
}

FeatureTable load_features(const std::string& path, const std::vector<std::string>& feature_names,
                           const std::string& label_column) {
  const CsvTable t = read_csv(path);
  std::vector<std::size_t> cols;
  for (const auto& n : feature_names) cols.push_back(column_index(t, n, path));
  FeatureTable out;
  out.X = Matrix(static_cast<Index>(t.rows.size()), static_cast<Index>(cols.size()));
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    for (std::size_t j = 0; j < cols.size(); ++j) {
      out.X(static_cast<Index>(i), static_cast<Index>(j)) = parse_cell(t.rows[i][cols[j]], path, i, t.header[cols[j]]);
    }
  }
  for (std::size_t j = 0; j < t.header.size(); ++j) {
    if (t.header[j] != label_column) continue;
    Eigen::VectorXi y(static_cast<Index>(t.rows.size()));
    for (std::size_t i = 0; i < t.rows.size(); ++i) y(static_cast<Index>(i)) = parse_label(t.rows[i][j], path, i, label_column);
    out.y = std::move(y);
  }
  return out;
}

void write_dataset_csv(const Dataset& data, const std::string& path, const std::string& label_column) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write '" + path + "'");
  for (const auto& n : data.feature_names) out << n << ',';
  out << label_column << '\n';
  for (Index i = 0; i < data.X_raw.rows(); ++i) {
    for (Index j = 0; j < data.X_raw.cols(); ++j) out << format_double(data.X_raw(i, j)) << ',';
    out << data.y(i) << '\n';
  }
  if (!out) throw IoError("write error on '" + path + "'");
}

}  // namespace skewgp
