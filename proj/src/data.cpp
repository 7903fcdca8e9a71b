/*
 * Copyright 2026 The spdgan Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *    http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "spdgan/data.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>

#include "json.hpp"
#include "spdgan/random.hpp"

namespace spdgan {

using nlohmann::json;

// ---------------------------------------------------------------------------
// Dataset model

int LabeledSpdDataset::num_classes() const {
  int c = 0;
  for (const LabeledSample& s : samples) c = std::max(c, s.label + 1);
  return c;
}

std::vector<int> LabeledSpdDataset::class_counts() const {
  std::vector<int> counts(num_classes(), 0);
  for (const LabeledSample& s : samples) ++counts[s.label];
  return counts;
}

std::vector<SpdMatrix> LabeledSpdDataset::matrices() const {
  std::vector<SpdMatrix> out;
  out.reserve(samples.size());
  for (const LabeledSample& s : samples) out.push_back(s.matrix);
  return out;
}

std::vector<int> LabeledSpdDataset::labels() const {
  std::vector<int> out;
  out.reserve(samples.size());
  for (const LabeledSample& s : samples) out.push_back(s.label);
  return out;
}

LabeledSpdDataset LabeledSpdDataset::subset(std::span<const int> indices) const {
  LabeledSpdDataset out;
  out.n = n;
  out.samples.reserve(indices.size());
  for (int i : indices) {
    if (i < 0 || static_cast<size_t>(i) >= samples.size()) {
      throw DimensionError("subset: index " + std::to_string(i) + " out of range");
    }
    out.samples.push_back(samples[i]);
  }
  return out;
}

std::vector<int> LabeledSpdDataset::indices_of(int label) const {
  std::vector<int> out;
  for (size_t i = 0; i < samples.size(); ++i) {
    if (samples[i].label == label) out.push_back(static_cast<int>(i));
  }
  return out;
}

void LabeledSpdDataset::validate(int min_classes) const {
  if (n <= 0) throw DataError("dataset dimension must be positive");
  for (size_t i = 0; i < samples.size(); ++i) {
    const LabeledSample& s = samples[i];
    const std::string name = "sample " + std::to_string(i) + (s.id.empty() ? "" : " (id " + s.id + ")");
    if (s.matrix.dim() != n) throw DataError(name + ": matrix is not " + std::to_string(n) + "x" + std::to_string(n));
    if (s.label < 0) throw DataError(name + ": negative label");
    const EigenDecomposition eig = sym_eig(s.matrix);
    if (!(eig.values(0) > kSpdTol)) {
      std::ostringstream os;
      os << name << ": not positive definite (smallest eigenvalue " << eig.values(0) << ")";
      throw DataError(os.str());
    }
  }
  if (min_classes > 0) {
    const std::vector<int> counts = class_counts();
    if (static_cast<int>(counts.size()) < min_classes) {
      throw DataError("dataset has " + std::to_string(counts.size()) + " classes, need at least " +
                      std::to_string(min_classes));
    }
    for (size_t c = 0; c < counts.size(); ++c) {
      if (counts[c] == 0) throw DataError("class " + std::to_string(c) + " has no samples");
    }
  }
}

LabeledSpdDataset concat(const LabeledSpdDataset& a, const LabeledSpdDataset& b) {
  if (!a.empty() && !b.empty() && a.n != b.n) throw DimensionError("concat: datasets differ in dimension");
  LabeledSpdDataset out = a;
  if (out.n == 0) out.n = b.n;
  out.samples.insert(out.samples.end(), b.samples.begin(), b.samples.end());
  return out;
}

// ---------------------------------------------------------------------------
// Correlation estimation

SpdMatrix correlation_matrix(const Matrix& series, double shrink) {
  const Eigen::Index t = series.rows(), n = series.cols();
  if (t < 2) throw DataError("correlation_matrix: need at least two time points");
  if (n < 1) throw DataError("correlation_matrix: no columns");
  if (!(shrink >= 0.0 && shrink <= 1.0)) throw ConfigError("correlation_matrix: shrink must lie in [0, 1]");
  const Matrix centered = series.rowwise() - series.colwise().mean();
  const Matrix cov = centered.transpose() * centered;
  Vector sd(n);
  for (Eigen::Index j = 0; j < n; ++j) {
    sd(j) = std::sqrt(cov(j, j));
    if (!(sd(j) > 0.0)) {
      throw DataError("correlation_matrix: column " + std::to_string(j) +
                      " is constant; correlation undefined");
    }
  }
  Matrix c(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    c(i, i) = 1.0;
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const double r = std::clamp(cov(i, j) / (sd(i) * sd(j)), -1.0, 1.0);
      c(i, j) = c(j, i) = (1.0 - shrink) * r;
    }
  }
  return SpdMatrix(c);
}

Matrix read_time_series_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open time-series file '" + path + "'");
  std::vector<std::vector<double>> rows;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    bool numeric = true;
    while (std::getline(ss, cell, ',')) {
      try {
        size_t used = 0;
        const double v = std::stod(cell, &used);
        if (cell.find_first_not_of(" \t", used) != std::string::npos) numeric = false;
        row.push_back(v);
      } catch (const std::exception&) {
        numeric = false;
      }
    }
    if (!numeric) {
      if (rows.empty() && lineno == 1) continue;  // header
      throw DataError(path + ":" + std::to_string(lineno) + ": non-numeric field");
    }
    if (!rows.empty() && row.size() != rows.front().size()) {
      throw DataError(path + ":" + std::to_string(lineno) + ": expected " +
                      std::to_string(rows.front().size()) + " columns, got " + std::to_string(row.size()));
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw DataError(path + ": no data rows");
  Matrix out(rows.size(), rows.front().size());
  for (size_t r = 0; r < rows.size(); ++r) {
    for (size_t c = 0; c < rows[r].size(); ++c) out(r, c) = rows[r][c];
  }
  return out;
}

// ---------------------------------------------------------------------------
// Synthetic benchmark

namespace {

// Symmetric Gaussian with diagonal ~ N(0,1) and off-diagonal ~ N(0,1/2), so
// that the sqrt(2)-weighted half-vectorization is standard normal.
Matrix isotropic_symmetric(int n, Rng& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix v(n, n);
  for (int i = 0; i < n; ++i) {
    v(i, i) = normal(rng);
    for (int j = i + 1; j < n; ++j) v(i, j) = v(j, i) = normal(rng) / std::sqrt(2.0);
  }
  return v;
}

}  // namespace

SynthBenchmark synth_benchmark(const SynthOptions& opts) {
  if (opts.n < 2) throw ConfigError("synth_benchmark: n must be at least 2");
  if (opts.per_class.empty()) throw ConfigError("synth_benchmark: per_class is empty");
  for (int c : opts.per_class) {
    if (c < 1) throw ConfigError("synth_benchmark: every class count must be at least 1");
  }
  if (opts.spread < 0.0 || opts.class_sep < 0.0) {
    throw ConfigError("synth_benchmark: spread and class_sep must be non-negative");
  }
  Rng rng(opts.seed);
  const int n = opts.n;
  SynthBenchmark out;
  out.dataset.n = n;

  std::vector<ManifoldContext> centers;
  for (size_t c = 0; c < opts.per_class.size(); ++c) {
    Matrix s = isotropic_symmetric(n, rng);
    s /= s.norm();
    const SpdMatrix mu = exp_map(ManifoldContext(SpdMatrix::identity(n)),
                                 TangentVector(opts.class_sep * s));
    out.centers.push_back(mu);
    centers.emplace_back(mu);
  }

  const double norm = 1.0 / std::sqrt(static_cast<double>(tri_size(n)));
  int next_id = 0;
  for (size_t c = 0; c < opts.per_class.size(); ++c) {
    const ManifoldContext& ctx = centers[c];
    for (int k = 0; k < opts.per_class[c]; ++k) {
      const Matrix v = (opts.spread * norm) * isotropic_symmetric(n, rng);
      // Whitened at the center, so the spread is isotropic in the AIRM.
      const Matrix tangent = ctx.sqrt() * v * ctx.sqrt();
      LabeledSample s{exp_map(ctx, TangentVector(tangent)), static_cast<int>(c),
                      std::to_string(next_id++), false};
      out.dataset.samples.push_back(std::move(s));
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Stratified folds

SplitPlan stratified_kfold(const LabeledSpdDataset& data, int k, std::uint64_t seed) {
  if (k < 2) throw ConfigError("stratified_kfold: k must be at least 2");
  const std::vector<int> counts = data.class_counts();
  for (size_t c = 0; c < counts.size(); ++c) {
    if (counts[c] > 0 && counts[c] < k) {
      throw DataError("stratified_kfold: class " + std::to_string(c) + " has " +
                      std::to_string(counts[c]) + " samples, fewer than k=" + std::to_string(k));
    }
  }
  std::vector<int> order(data.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    const LabeledSample& sa = data.samples[a];
    const LabeledSample& sb = data.samples[b];
    if (sa.label != sb.label) return sa.label < sb.label;
    return sa.id < sb.id;
  });

  SplitPlan plan;
  plan.k = k;
  plan.seed = seed;
  plan.test.assign(k, {});
  Rng rng(seed);
  size_t offset = 0;
  size_t begin = 0;
  while (begin < order.size()) {
    size_t end = begin;
    while (end < order.size() && data.samples[order[end]].label == data.samples[order[begin]].label) ++end;
    std::vector<int> members(order.begin() + begin, order.begin() + end);
    std::shuffle(members.begin(), members.end(), rng);
    for (size_t p = 0; p < members.size(); ++p) plan.test[(p + offset) % k].push_back(members[p]);
    offset = (offset + members.size()) % k;
    begin = end;
  }
  plan.train.assign(k, {});
  for (int f = 0; f < k; ++f) {
    std::sort(plan.test[f].begin(), plan.test[f].end());
    for (int g = 0; g < k; ++g) {
      if (g != f) plan.train[f].insert(plan.train[f].end(), plan.test[g].begin(), plan.test[g].end());
    }
    std::sort(plan.train[f].begin(), plan.train[f].end());
  }
  return plan;
}

// ---------------------------------------------------------------------------
// JSON format

std::string dataset_to_json(const LabeledSpdDataset& data) {
  json j;
  j["version"] = 1;
  j["n"] = data.n;
  json samples = json::array();
  for (const LabeledSample& s : data.samples) {
    json js;
    js["id"] = s.id;
    js["label"] = s.label;
    json rows = json::array();
    for (int r = 0; r < s.matrix.dim(); ++r) {
      json row = json::array();
      for (int c = 0; c < s.matrix.dim(); ++c) row.push_back(s.matrix(r, c));
      rows.push_back(std::move(row));
    }
    js["matrix"] = std::move(rows);
    if (s.synthetic) js["synthetic"] = true;
    samples.push_back(std::move(js));
  }
  j["samples"] = std::move(samples);
  return j.dump() + "\n";
}

namespace {

[[noreturn]] void field_error(const std::string& source, const std::string& field, const std::string& what) {
  throw DataError(source + ": " + field + ": " + what);
}

const json& member(const json& obj, const char* key, const std::string& source, const std::string& path) {
  auto it = obj.find(key);
  if (it == obj.end()) field_error(source, path + "." + key, "missing field");
  return *it;
}

}  // namespace

LabeledSpdDataset dataset_from_json(const std::string& text, const std::string& source) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    const size_t pos = std::min<size_t>(e.byte == 0 ? 0 : e.byte - 1, text.size());
    const long line = 1 + std::count(text.begin(), text.begin() + static_cast<long>(pos), '\n');
    throw DataError(source + ":" + std::to_string(line) + ": malformed JSON (" + e.what() + ")");
  }
  if (!j.is_object()) field_error(source, "$", "expected an object");
  const json& version = member(j, "version", source, "$");
  if (!version.is_number_integer() || version.get<int>() != 1) {
    field_error(source, "$.version", "unsupported dataset version " + version.dump());
  }
  const json& jn = member(j, "n", source, "$");
  if (!jn.is_number_integer() || jn.get<int>() <= 0) field_error(source, "$.n", "expected a positive integer");
  LabeledSpdDataset data;
  data.n = jn.get<int>();
  const json& samples = member(j, "samples", source, "$");
  if (!samples.is_array()) field_error(source, "$.samples", "expected an array");

  for (size_t i = 0; i < samples.size(); ++i) {
    const std::string path = "$.samples[" + std::to_string(i) + "]";
    const json& js = samples[i];
    if (!js.is_object()) field_error(source, path, "expected an object");
    LabeledSample s;
    if (auto it = js.find("id"); it != js.end()) {
      if (it->is_string()) {
        s.id = it->get<std::string>();
      } else if (it->is_number_integer()) {
        s.id = std::to_string(it->get<long long>());
      } else {
        field_error(source, path + ".id", "expected a string");
      }
    } else {
      s.id = std::to_string(i);
    }
    const json& label = member(js, "label", source, path);
    if (!label.is_number_integer() || label.get<int>() < 0) {
      field_error(source, path + ".label", "expected a non-negative integer");
    }
    s.label = label.get<int>();
    if (auto it = js.find("synthetic"); it != js.end()) {
      if (!it->is_boolean()) field_error(source, path + ".synthetic", "expected a boolean");
      s.synthetic = it->get<bool>();
    }
    const json& rows = member(js, "matrix", source, path);
    if (!rows.is_array() || rows.size() != static_cast<size_t>(data.n)) {
      field_error(source, path + ".matrix", "expected " + std::to_string(data.n) + " rows");
    }
    Matrix m(data.n, data.n);
    for (int r = 0; r < data.n; ++r) {
      const json& row = rows[r];
      if (!row.is_array() || row.size() != static_cast<size_t>(data.n)) {
        field_error(source, path + ".matrix[" + std::to_string(r) + "]",
                    "expected " + std::to_string(data.n) + " entries");
      }
      for (int c = 0; c < data.n; ++c) {
        if (!row[c].is_number()) {
          field_error(source, path + ".matrix[" + std::to_string(r) + "][" + std::to_string(c) + "]",
                      "expected a number");
        }
        m(r, c) = row[c].get<double>();
      }
    }
    if (!m.allFinite()) field_error(source, path + ".matrix", "non-finite entry");
    for (int r = 0; r < data.n; ++r) {
      for (int c = r + 1; c < data.n; ++c) {
        if (std::abs(m(r, c) - m(c, r)) > 1e-10 * std::max(1.0, std::abs(m(r, c)))) {
          throw DataError(source + ": " + path + " (id " + s.id + "): matrix is not symmetric at (" +
                          std::to_string(r) + "," + std::to_string(c) + ")");
        }
      }
    }
    const EigenDecomposition eig = sym_eig(Matrix(0.5 * (m + m.transpose())));
    if (!(eig.values(0) > kSpdTol)) {
      std::ostringstream os;
      os << source << ": " << path << " (id " << s.id << "): matrix is not positive definite "
         << "(smallest eigenvalue " << eig.values(0) << ")";
      throw DataError(os.str());
    }
    s.matrix = SpdMatrix(m);
    data.samples.push_back(std::move(s));
  }
  return data;
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot open '" + path + "' for writing");
  out << text;
  if (!out) throw DataError("write to '" + path + "' failed");
}

LabeledSpdDataset read_dataset(const std::string& path) {
  return dataset_from_json(read_text_file(path), path);
}

void write_dataset(const std::string& path, const LabeledSpdDataset& data) {
  write_text_file(path, dataset_to_json(data));
}

}  // namespace spdgan
