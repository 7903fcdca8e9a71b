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

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "spdgan/spd.hpp"

namespace spdgan {

struct LabeledSample {
  SpdMatrix matrix;
  int label = 0;
  std::string id;
  bool synthetic = false;
};

struct LabeledSpdDataset {
  int n = 0;
  std::vector<LabeledSample> samples;

  size_t size() const noexcept { return samples.size(); }
  bool empty() const noexcept { return samples.empty(); }
  /// 1 + the largest label, 0 for an empty set.
  int num_classes() const;
  std::vector<int> class_counts() const;
  std::vector<SpdMatrix> matrices() const;
  std::vector<int> labels() const;
  LabeledSpdDataset subset(std::span<const int> indices) const;
  /// Indices of the samples carrying `label`, in dataset order.
  std::vector<int> indices_of(int label) const;

  /// Shape and SPD checks plus: at least `min_classes` classes, each of
  /// {0..C-1} represented. Errors name the offending sample.
  void validate(int min_classes = 0) const;
};

LabeledSpdDataset concat(const LabeledSpdDataset& a, const LabeledSpdDataset& b);

/// Pearson correlation of the columns of a T x n series, blended as
/// (1 - shrink) C + shrink I. Unit diagonal is kept exactly.
SpdMatrix correlation_matrix(const Matrix& series, double shrink = 1e-3);

/// T rows x n columns, comma separated, optional non-numeric header row.
Matrix read_time_series_csv(const std::string& path);

struct SynthOptions {
  int n = 6;
  std::vector<int> per_class{200, 200};
  double spread = 0.3;     // RMS geodesic distance of a sample from its class center
  double class_sep = 1.0;  // geodesic distance of each center from the identity
  std::uint64_t seed = 0;
};

struct SynthBenchmark {
  LabeledSpdDataset dataset;
  std::vector<SpdMatrix> centers;  // ground-truth Frechet mean per class
};

/// Manifold-Gaussian benchmark: centers mu_c = Exp(class_sep * S_c) with unit
/// Frobenius S_c, samples mu_c^{1/2} Exp(spread * V) mu_c^{1/2} with V an
/// isotropic symmetric Gaussian normalized to E||V||_F^2 = 1.
SynthBenchmark synth_benchmark(const SynthOptions& opts);

struct SplitPlan {
  int k = 0;
  std::uint64_t seed = 0;
  std::vector<std::vector<int>> train;
  std::vector<std::vector<int>> test;
};

/// Samples are ordered by (label, id), shuffled within each class, and dealt
/// round-robin over the folds.
SplitPlan stratified_kfold(const LabeledSpdDataset& data, int k, std::uint64_t seed);

std::string dataset_to_json(const LabeledSpdDataset& data);
LabeledSpdDataset dataset_from_json(const std::string& text, const std::string& source = "<memory>");
LabeledSpdDataset read_dataset(const std::string& path);
void write_dataset(const std::string& path, const LabeledSpdDataset& data);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& text);

}  // namespace spdgan
