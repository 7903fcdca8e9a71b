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

// Conditional Wasserstein GAN on the SPD manifold. The generator emits the
// upper triangle of a tangent vector at the base point y; samples are mapped
// to the manifold with exp_y. Manifold reconstruction and graph smoothness
// terms are differentiated through Exp/Log with the Daleckii-Krein rule.

#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "spdgan/data.hpp"
#include "spdgan/graph.hpp"
#include "spdgan/mlp.hpp"

namespace spdgan {

struct LossWeights {
  double alpha1 = 0.8;  // adversarial
  double alpha2 = 0.8;  // manifold reconstruction
  double alpha3 = 0.8;  // tangent reconstruction
  double alpha4 = 1.0;  // manifold graph smoothness
  double alpha5 = 1.0;  // tangent graph smoothness
  double lambda = 10.0;  // gradient penalty

  /// Throws ConfigError unless every weight is finite and non-negative.
  void validate() const;
};

enum class BasePointMode { global, per_class };

BasePointMode parse_base_point_mode(const std::string& name);
std::string to_string(BasePointMode mode);

struct TrainConfig {
  int batch_size = 32;
  int epochs = 100;
  int critic_iters = 5;
  double learning_rate = 1e-4;
  std::uint64_t seed = 0;
  GraphMetric graph_metric = GraphMetric::geodesic;
  std::optional<double> graph_sigma;  // median heuristic when empty
  int graph_knn = 0;
  BasePointMode base_point_mode = BasePointMode::global;
  int noise_dim = 100;
  std::vector<int> generator_hidden{256, 256};
  std::vector<int> critic_hidden{256, 128};
  std::optional<double> output_scale;  // 99th percentile of |tangent entries| when empty

  void validate() const;
};

struct GanModel {
  int n = 0;
  int num_classes = 0;
  int noise_dim = 0;
  double output_scale = 1.0;
  MlpParams generator;  // noise ++ one_hot -> tri(n), tanh output
  MlpParams critic;     // tri(n) ++ one_hot -> 1, linear output
  AdamState generator_adam;
  AdamState critic_adam;
  LossWeights weights;
  BasePointMode base_point_mode = BasePointMode::global;
  /// One context in global mode, one per class otherwise.
  std::vector<ManifoldContext> base_points;
  std::string rng_state;

  const ManifoldContext& context(int label) const;
  /// Shape checks between the networks, n, and the class count.
  void validate() const;
};

/// Builds a model with fresh networks around the given base points.
GanModel init_model(int n, int num_classes, const TrainConfig& cfg, const LossWeights& weights,
                    std::vector<SpdMatrix> base_points, double output_scale, Rng& rng);

/// Plain half-vectorization of log_y(x) for every sample, one per column,
/// each at the base point of its label.
Matrix tangent_columns(const GanModel& model, const LabeledSpdDataset& data);

struct Minibatch {
  std::vector<int> indices;  // rows of the training set, also graph nodes
  std::vector<int> labels;
  std::vector<SpdMatrix> real;
  Matrix real_tangents;  // tri(n) x B, plain vech of log_y(x_i)
  Matrix noise;          // noise_dim x B, column i paired with sample i
  Vector epsilon;        // interpolation coefficient per pair

  int size() const noexcept { return static_cast<int>(indices.size()); }
};

/// Pairs fresh noise and interpolation coefficients with the given samples.
/// `tangents` holds tangent_columns() of the whole training set.
Minibatch make_minibatch(const GanModel& model, const LabeledSpdDataset& train, const Matrix& tangents,
                         std::vector<int> indices, Rng& rng);

TangentVector generate_tangent(const GanModel& model, const Vector& z, int c);
SpdMatrix generate_spd(const GanModel& model, const Vector& z, int c);
/// Raw generator output for a batch: tri(n) x B.
Matrix generator_output(const GanModel& model, const Matrix& noise, std::span<const int> labels);

double critic_score(const GanModel& model, const TangentVector& tangent, int c);

struct AdversarialTerms {
  double wasserstein = 0.0;       // mean D(real) - mean D(generated)
  double gradient_penalty = 0.0;  // before lambda
  double critic_objective = 0.0;  // wasserstein + lambda * gradient_penalty
  double generator_term = 0.0;    // -mean D(generated)
};

AdversarialTerms adversarial_loss(const GanModel& model, const Minibatch& batch);
/// Uses batch.epsilon.
double gradient_penalty(const GanModel& model, const Minibatch& batch);
/// Draws a fresh epsilon per pair from `rng`.
double gradient_penalty(const GanModel& model, const Minibatch& batch, Rng& rng);

struct PairLosses {
  double manifold = 0.0;
  double tangent = 0.0;
};

PairLosses reconstruction_losses(const GanModel& model, const Minibatch& batch);
/// `weights` is the B x B batch subgraph; its diagonal is ignored.
PairLosses graph_losses(const GanModel& model, const Minibatch& batch, const Matrix& weights);

enum class Role { critic, generator };

std::string to_string(Role role);

struct LossBreakdown {
  AdversarialTerms adversarial;
  PairLosses reconstruction;
  PairLosses graph;
  double loss = 0.0;  // minimized by the role's optimizer
};

/// Critic: alpha1 * (-wasserstein + lambda * penalty).
/// Generator: alpha1 * generator_term + alpha2 * L_M_rec + alpha3 * L_T_rec
///            + alpha4 * L_M_graph + alpha5 * L_T_graph.
LossBreakdown total_loss(const GanModel& model, const Minibatch& batch, const Matrix& weights, Role role);

struct RoleGradient {
  LossBreakdown terms;
  Vector gradient;  // flattened like the role's network
};

RoleGradient loss_gradient(const GanModel& model, const Minibatch& batch, const Matrix& weights, Role role);

struct TrainRecord {
  long long step = 0;  // generator iteration
  Role role = Role::critic;
  double wasserstein_est = 0.0;
  double l_adv = 0.0;
  std::optional<double> l_m_rec;
  std::optional<double> l_t_rec;
  std::optional<double> l_m_graph;
  std::optional<double> l_t_graph;
  double grad_norm = 0.0;
};

std::string to_json_line(const TrainRecord& record);

struct TrainResult {
  GanModel model;
  PopulationGraph graph;
  std::vector<TrainRecord> log;
};

/// Generator iterations per epoch: ceil(M / batch).
long long generator_steps(const TrainConfig& cfg, size_t train_size);

/// Alternating optimization: each generator update follows critic_iters
/// critic updates, every update on a fresh minibatch. Throws NumericalError
/// when a loss turns non-finite or |wasserstein| exceeds 1e6.
TrainResult train(const LabeledSpdDataset& data, const TrainConfig& cfg, const LossWeights& weights,
                  const std::function<void(const TrainRecord&)>& on_record = {});

/// counts[c] samples of class c, flagged synthetic, ids "gen-<c>-<k>".
LabeledSpdDataset generate_dataset(const GanModel& model, std::span<const int> counts, std::uint64_t seed);

std::string model_to_json(const GanModel& model);
GanModel model_from_json(const std::string& text, const std::string& source = "<memory>");
void write_model(const std::string& path, const GanModel& model);
GanModel read_model(const std::string& path);

}  // namespace spdgan
