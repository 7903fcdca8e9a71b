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

// Geometry score: one-dimensional persistent homology of landmark complexes,
// summarized as relative living times of the Betti number and compared
// between two point clouds.

#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "spdgan/data.hpp"
#include "spdgan/random.hpp"

namespace spdgan {

class TopologyError : public DataError {
 public:
  explicit TopologyError(const std::string& what) : DataError(what) {}
};

/// One point per row.
struct PointCloud {
  Matrix points;

  int size() const noexcept { return static_cast<int>(points.rows()); }
  int dim() const noexcept { return static_cast<int>(points.cols()); }
  /// At least 4 finite points.
  void validate() const;
};

struct PersistenceBarcode {
  std::vector<std::pair<double, double>> intervals;  // H1, births <= deaths
  double alpha_max = 0.0;
};

enum class ComplexKind { witness, rips };

ComplexKind parse_complex_kind(const std::string& name);
std::string to_string(ComplexKind kind);

struct WitnessOptions {
  int landmarks = 32;
  double alpha_frac = 1.0 / 8.0;
  ComplexKind complex = ComplexKind::witness;
  /// Witness relaxation: a simplex is witnessed at time
  /// max_l d(w, l) - d(w, nu-th nearest landmark); 0 disables the offset.
  int nu = 2;
};

/// Vertices, edges and triangles of a landmark complex with activation times.
struct FilteredComplex {
  struct Simplex {
    std::vector<int> vertices;  // sorted landmark positions
    double time = 0.0;
  };
  std::vector<Simplex> simplices;  // sorted by (time, dimension, vertices)
  double alpha_max = 0.0;
};

/// Builds the complex on the given landmark rows; simplices later than
/// alpha_max are dropped.
FilteredComplex landmark_complex(const PointCloud& cloud, std::span<const int> landmarks,
                                 const WitnessOptions& opts);

/// H1 intervals of a filtered complex by column reduction over GF(2).
/// Zero-length intervals are dropped; unpaired cycles die at alpha_max.
PersistenceBarcode persistence_h1(const FilteredComplex& complex);

PersistenceBarcode witness_barcode(const PointCloud& cloud, const WitnessOptions& opts, Rng& rng);

/// Fraction of [0, alpha_max] with exactly i live intervals, i < i_max.
std::vector<double> rlt(const PersistenceBarcode& barcode, int i_max);

struct GscoreParams {
  WitnessOptions witness;
  int runs = 100;
  int i_max = 10;
  std::uint64_t seed = 0;

  void validate() const;
};

/// Mean of rlt over independent landmark draws; run r uses the stream
/// derive_seed(seed, r).
std::vector<double> mrlt(const PointCloud& cloud, const GscoreParams& params);

double geometry_score(std::span<const double> mrlt1, std::span<const double> mrlt2);
/// Clouds must share their ambient dimension. Both use the same landmark
/// count, min(landmarks, |cloud1|, |cloud2|).
double geometry_score(const PointCloud& cloud1, const PointCloud& cloud2, const GscoreParams& params);

/// Rows are the sqrt(2)-weighted half-vectorizations of log_y(x_i).
PointCloud spd_cloud(std::span<const SpdMatrix> samples, const ManifoldContext& ctx);

}  // namespace spdgan
