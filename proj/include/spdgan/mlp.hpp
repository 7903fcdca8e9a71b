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
#include <random>
#include <span>
#include <string>
#include <vector>

#include "spdgan/random.hpp"
#include "spdgan/tape.hpp"

namespace spdgan {

enum class Activation { leaky_relu, tanh, linear };

inline constexpr double kLeakySlope = 0.2;

Activation parse_activation(const std::string& name);
std::string to_string(Activation act);

struct DenseLayer {
  Matrix weight;  // out x in
  Vector bias;    // out
  Activation act = Activation::linear;
};

/// Fully-connected network; layer k maps width[k] -> width[k+1].
struct MlpParams {
  std::vector<DenseLayer> layers;

  int input_dim() const;
  int output_dim() const;
  size_t parameter_count() const;
  /// e.g. "in:102-256-256-out:21"
  std::string architecture() const;
  /// Throws DimensionError when adjacent layers do not chain.
  void validate() const;
};

/// Glorot-uniform weights, zero biases. `widths` includes input and output.
MlpParams init_mlp(std::span<const int> widths, Activation hidden, Activation output, Rng& rng);
/// All-zero network of the given shape.
MlpParams zero_mlp(std::span<const int> widths, Activation hidden, Activation output);

/// Concatenation of every weight (row-major) and bias, layer by layer.
Vector flatten(const MlpParams& params);
void unflatten(MlpParams& params, const Vector& flat);

/// Plain evaluation, one sample per column.
Matrix mlp_forward(const MlpParams& params, const Matrix& inputs);

// ---------------------------------------------------------------------------
// Tape-recorded evaluation

struct MlpBinding {
  std::vector<ad::Var> weights;
  std::vector<ad::Var> biases;
};

/// Places the parameters on the tape, as variables when `trainable`.
MlpBinding bind(ad::Tape& tape, const MlpParams& params, bool trainable);

struct MlpTrace {
  std::vector<ad::Var> pre_activations;
  ad::Var output;
};

MlpTrace mlp_forward(const MlpParams& params, const MlpBinding& binding, ad::Var inputs);

/// For a network with one output unit: d(output_b)/d(input_b) for every
/// column b, built from tape ops so that it can itself be differentiated
/// with respect to the parameters.
ad::Var mlp_input_gradient(const MlpParams& params, const MlpBinding& binding,
                           const MlpTrace& trace);

/// Gradients of the bound parameters after backward(), flattened like
/// flatten(params). Unreached parameters contribute zeros.
Vector binding_gradient(const ad::Tape& tape, const MlpBinding& binding);

// ---------------------------------------------------------------------------
// Adam

struct AdamState {
  Vector m;
  Vector v;
  long long t = 0;
  double learning_rate = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;

  static AdamState for_size(Eigen::Index size, double learning_rate);
};

/// Bias-corrected Adam step in the minimization direction.
void adam_step(std::span<double> params, std::span<const double> grads, AdamState& state);
void adam_step(MlpParams& params, const Vector& grads, AdamState& state);

// ---------------------------------------------------------------------------
// Sampling

Vector sample_noise(Rng& rng, int dim);
Vector one_hot(int c, int num_classes);

std::string rng_state(const Rng& rng);
void set_rng_state(Rng& rng, const std::string& state);

// ---------------------------------------------------------------------------
// Single-network checkpoint

struct NetworkCheckpoint {
  MlpParams params;
  AdamState adam;
  std::string rng_state;
};

/// {"version":1, "arch":..., "layers":[{"w":[...], "b":[...], "act":..., "shape":[r,c]}],
///  "adam":{...}, "rng_state":...}
std::string network_checkpoint_to_json(const NetworkCheckpoint& ckpt);
/// Throws DataError on malformed input or an unknown version.
NetworkCheckpoint network_checkpoint_from_json(const std::string& text, const std::string& source = "<memory>");

}  // namespace spdgan
