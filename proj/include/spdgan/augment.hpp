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

// Downstream evaluation: a logistic classifier on tangent-space features and
// the k-fold protocol that trains one GAN per fold and augments the fold's
// training split with generated samples.

#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "spdgan/gan.hpp"

namespace spdgan {

/// sqrt(2)-weighted half-vectorization of log_y(x).
Vector tangent_features(const SpdMatrix& x, const ManifoldContext& ref);

struct ClassifierParams {
  double l2 = 1e-2;
  int steps = 500;
  double learning_rate = 0.1;

  void validate() const;
};

/// Binary logistic regression on tangent features at the training split's
/// Frechet mean. Class 1 is the positive class.
struct ClassifierModel {
  ManifoldContext reference;
  Vector weights;
  double bias = 0.0;
  ClassifierParams params;

  double decision(const SpdMatrix& x) const;
  int predict(const SpdMatrix& x) const { return decision(x) > 0.0 ? 1 : 0; }
};

/// Full-batch gradient descent from zero on mean log-loss + l2/2 ||w||^2.
/// Throws DataError unless exactly two classes are present.
ClassifierModel fit_classifier(const LabeledSpdDataset& train, const ClassifierParams& params = {});

struct Metrics {
  double accuracy = 0.0;
  double recall = 0.0;     // macro over both classes
  double precision = 0.0;  // macro, 0/0 counts as 0
  double f1 = 0.0;         // macro of per-class F1
  double roc_auc = 0.0;    // rank statistic, ties count 1/2
};

/// Metrics from labels, hard predictions and decision scores.
Metrics compute_metrics(std::span<const int> labels, std::span<const int> predictions,
                        std::span<const double> scores);
Metrics evaluate(const ClassifierModel& model, const LabeledSpdDataset& test);

struct AugmentConfig {
  int folds = 5;
  std::vector<int> multipliers{0, 1, 2, 3};
  std::uint64_t seed = 0;
  TrainConfig gan;  // gan.seed is replaced per fold
  LossWeights weights;
  ClassifierParams classifier;

  void validate() const;
};

struct MultiplierReport {
  int multiplier = 0;
  std::vector<Metrics> folds;
  Metrics mean;
  Metrics std;  // population standard deviation across folds
};

struct EvalReport {
  int folds = 0;
  std::uint64_t seed = 0;
  std::string generator;  // architecture of the per-fold generators
  std::vector<MultiplierReport> rows;
};

/// Fold f trains its GAN with seed derive_seed(seed, f) on the real training
/// split only; multiplier m adds m x |train| generated samples with the
/// split's class balance. Test folds hold real samples only.
EvalReport augmentation_experiment(const LabeledSpdDataset& data, const AugmentConfig& cfg);

std::string report_to_json(const EvalReport& report);
/// One row per multiplier, columns <metric>_mean and <metric>_std.
std::string report_to_csv(const EvalReport& report);

}  // namespace spdgan
