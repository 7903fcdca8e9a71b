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

#include "spdgan/graph.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include "json.hpp"
#include <sstream>
#include <vector>

namespace spdgan {

GraphMetric parse_graph_metric(const std::string& name) {
  if (name == "euclidean") return GraphMetric::euclidean;
  if (name == "geodesic") return GraphMetric::geodesic;
  throw ConfigError("unknown graph metric '" + name + "' (expected euclidean|geodesic)");
}

std::string to_string(GraphMetric metric) {
  return metric == GraphMetric::euclidean ? "euclidean" : "geodesic";
}

Matrix pairwise_distances(std::span<const SpdMatrix> samples, GraphMetric metric) {
  const int m = static_cast<int>(samples.size());
  if (m == 0) return Matrix();
  const int n = samples.front().dim();
  for (const SpdMatrix& s : samples) {
    if (s.dim() != n) throw DimensionError("pairwise_distances: samples differ in dimension");
  }
  Matrix d = Matrix::Zero(m, m);
  if (metric == GraphMetric::euclidean) {
    for (int i = 0; i < m; ++i) {
      for (int j = i + 1; j < m; ++j) {
        d(i, j) = d(j, i) = (samples[i].matrix() - samples[j].matrix()).norm();
      }
    }
    return d;
  }
  // Geodesic: cache x_i^{-1/2} once per sample.
  std::vector<Matrix> inv_roots;
  inv_roots.reserve(m);
  for (const SpdMatrix& s : samples) {
    const EigenDecomposition eig = sym_eig(s);
    check_domain(eig, MatrixFunction::inv_sqrt());
    inv_roots.push_back(apply_spectral(eig, MatrixFunction::inv_sqrt()));
  }
  for (int i = 0; i < m; ++i) {
    for (int j = i + 1; j < m; ++j) {
      Matrix inner = inv_roots[i] * samples[j].matrix() * inv_roots[i];
      inner = 0.5 * (inner + inner.transpose()).eval();
      const EigenDecomposition eig = sym_eig(inner);
      check_domain(eig, MatrixFunction::log());
      double acc = 0.0;
      for (Eigen::Index k = 0; k < eig.values.size(); ++k) {
        const double l = std::log(eig.values(k));
        acc += l * l;
      }
      d(i, j) = d(j, i) = std::sqrt(acc);
    }
  }
  return d;
}

namespace {

double median_of_upper(const Matrix& d) {
  const int m = static_cast<int>(d.rows());
  if (m < 2) throw BandwidthError("median bandwidth needs at least two samples");
  std::vector<double> vals;
  vals.reserve(static_cast<size_t>(m) * (m - 1) / 2);
  for (int i = 0; i < m; ++i) {
    for (int j = i + 1; j < m; ++j) vals.push_back(d(i, j));
  }
  std::sort(vals.begin(), vals.end());
  const size_t k = vals.size();
  const double med = (k % 2 == 1) ? vals[k / 2] : 0.5 * (vals[k / 2 - 1] + vals[k / 2]);
  // Round-off leaves ~1e-16 between identical samples under the geodesic metric.
  constexpr double kZeroDistance = 1e-10;
  if (!(med > kZeroDistance)) {
    throw BandwidthError(vals.back() > kZeroDistance
                             ? "median pairwise distance is zero (duplicates dominate); pass sigma explicitly"
                             : "all pairwise distances are zero; kernel bandwidth is undefined");
  }
  return med;
}

}  // namespace

double median_sigma(std::span<const SpdMatrix> samples, GraphMetric metric) {
  return median_of_upper(pairwise_distances(samples, metric));
}

PopulationGraph graph_from_distances(const Matrix& distances, GraphMetric metric,
                                     std::optional<double> sigma, int knn) {
  const int m = static_cast<int>(distances.rows());
  if (m < 2) throw DataError("build_graph: need at least two samples");
  if (sigma && !(*sigma > 0.0)) throw ConfigError("build_graph: sigma must be positive");
  const double s = sigma ? *sigma : median_of_upper(distances);

  PopulationGraph g;
  g.sigma = s;
  g.metric = metric;
  g.weights.resize(m, m);
  const double inv_s2 = 1.0 / (s * s);
  for (int i = 0; i < m; ++i) {
    g.weights(i, i) = 1.0;
    for (int j = i + 1; j < m; ++j) {
      const double dij = distances(i, j);
      g.weights(i, j) = g.weights(j, i) = std::exp(-dij * dij * inv_s2);
    }
  }

  if (knn > 0 && knn < m - 1) {
    Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic> keep =
        Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic>::Constant(m, m, false);
    std::vector<int> order(m);
    for (int i = 0; i < m; ++i) {
      std::iota(order.begin(), order.end(), 0);
      std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
        return distances(i, a) < distances(i, b);
      });
      keep(i, i) = true;
      int taken = 0;
      for (int j : order) {
        if (j == i) continue;
        if (taken++ >= knn) break;
        keep(i, j) = keep(j, i) = true;
      }
    }
    for (int i = 0; i < m; ++i) {
      for (int j = 0; j < m; ++j) {
        if (!keep(i, j)) g.weights(i, j) = 0.0;
      }
    }
  }
  return g;
}

PopulationGraph build_graph(std::span<const SpdMatrix> samples, GraphMetric metric,
                            std::optional<double> sigma, int knn) {
  if (samples.size() < 2) throw DataError("build_graph: need at least two samples");
  return graph_from_distances(pairwise_distances(samples, metric), metric, sigma, knn);
}

Matrix batch_subgraph(const PopulationGraph& graph, std::span<const int> indices) {
  const int k = static_cast<int>(indices.size());
  Matrix out(k, k);
  for (int a = 0; a < k; ++a) {
    if (indices[a] < 0 || indices[a] >= graph.size()) {
      std::ostringstream os;
      os << "batch_subgraph: index " << indices[a] << " out of range [0, " << graph.size() << ")";
      throw DimensionError(os.str());
    }
  }
  for (int a = 0; a < k; ++a) {
    for (int b = 0; b < k; ++b) out(a, b) = graph.weights(indices[a], indices[b]);
  }
  return out;
}

std::string graph_to_json(const PopulationGraph& graph) {
  nlohmann::json j;
  j["sigma"] = graph.sigma;
  j["metric"] = to_string(graph.metric);
  nlohmann::json rows = nlohmann::json::array();
  for (int i = 0; i < graph.size(); ++i) {
    nlohmann::json row = nlohmann::json::array();
    for (int k = 0; k < graph.size(); ++k) row.push_back(graph.weights(i, k));
    rows.push_back(std::move(row));
  }
  j["weights"] = std::move(rows);
  return j.dump();
}

void write_graph_json(const std::string& path, const PopulationGraph& graph) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot open '" + path + "' for writing");
  out << graph_to_json(graph) << '\n';
}

}  // namespace spdgan
