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

#pragma once

#include <optional>
#include <span>
#include <string>

#include "spdgan/spd.hpp"

namespace spdgan {

enum class GraphMetric { euclidean, geodesic };

GraphMetric parse_graph_metric(const std::string& name);
std::string to_string(GraphMetric metric);

/// Raised when a kernel bandwidth cannot be derived from the data.
class BandwidthError : public DataError {
 public:
  explicit BandwidthError(const std::string& what) : DataError(what) {}
};

/// Dense Gaussian-kernel similarity graph over a sample population.
struct PopulationGraph {
  Matrix weights;  // symmetric, unit diagonal
  double sigma = 0.0;
  GraphMetric metric = GraphMetric::geodesic;

  int size() const noexcept { return static_cast<int>(weights.rows()); }
};

/// Symmetric matrix of pairwise distances. Euclidean uses all n^2 entries of
/// the flattened matrices; geodesic uses the affine-invariant distance.
Matrix pairwise_distances(std::span<const SpdMatrix> samples, GraphMetric metric);

/// Median of the M(M-1)/2 off-diagonal pairwise distances.
double median_sigma(std::span<const SpdMatrix> samples, GraphMetric metric);

/// w_ij = exp(-D(x_i, x_j)^2 / sigma^2). When `sigma` is empty the median
/// heuristic is used. `knn` > 0 keeps only edges where one endpoint is among
/// the other's knn nearest neighbours (the diagonal is always kept).
PopulationGraph build_graph(std::span<const SpdMatrix> samples, GraphMetric metric,
                            std::optional<double> sigma = std::nullopt, int knn = 0);

/// Kernel weights from a precomputed distance matrix.
PopulationGraph graph_from_distances(const Matrix& distances, GraphMetric metric,
                                     std::optional<double> sigma = std::nullopt,
                                     int knn = 0);

/// |indices| x |indices| restriction of W. Indices may repeat.
Matrix batch_subgraph(const PopulationGraph& graph, std::span<const int> indices);

/// {"sigma":..., "metric":..., "weights":[[...]]}
std::string graph_to_json(const PopulationGraph& graph);
void write_graph_json(const std::string& path, const PopulationGraph& graph);

}  // namespace spdgan
