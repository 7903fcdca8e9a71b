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

#include "spdgan/mlp.hpp"

#include <cmath>
#include <sstream>

#include "json_util.hpp"

namespace spdgan {

Activation parse_activation(const std::string& name) {
  if (name == "leaky_relu") return Activation::leaky_relu;
  if (name == "tanh") return Activation::tanh;
  if (name == "linear") return Activation::linear;
  throw DataError("unknown activation '" + name + "'");
}

std::string to_string(Activation act) {
  switch (act) {
    case Activation::leaky_relu:
      return "leaky_relu";
    case Activation::tanh:
      return "tanh";
    case Activation::linear:
      return "linear";
  }
  return "linear";
}

int MlpParams::input_dim() const {
  return layers.empty() ? 0 : static_cast<int>(layers.front().weight.cols());
}

int MlpParams::output_dim() const {
  return layers.empty() ? 0 : static_cast<int>(layers.back().weight.rows());
}

size_t MlpParams::parameter_count() const {
  size_t count = 0;
  for (const DenseLayer& l : layers) count += l.weight.size() + l.bias.size();
  return count;
}

std::string MlpParams::architecture() const {
  std::ostringstream os;
  os << "in:" << input_dim();
  for (size_t k = 0; k + 1 < layers.size(); ++k) os << "-" << layers[k].weight.rows();
  os << "-out:" << output_dim();
  return os.str();
}

void MlpParams::validate() const {
  for (size_t k = 0; k < layers.size(); ++k) {
    const DenseLayer& l = layers[k];
    if (l.bias.size() != l.weight.rows()) {
      throw DimensionError("mlp layer " + std::to_string(k) + ": bias length != output width");
    }
    if (k > 0 && l.weight.cols() != layers[k - 1].weight.rows()) {
      throw DimensionError("mlp layer " + std::to_string(k) + ": input width does not chain");
    }
  }
}

namespace {

Activation layer_act(size_t k, size_t count, Activation hidden, Activation output) {
  return k + 1 == count ? output : hidden;
}

Matrix activate(const Matrix& pre, Activation act) {
  switch (act) {
    case Activation::leaky_relu:
      return pre.unaryExpr([](double x) { return x > 0.0 ? x : kLeakySlope * x; });
    case Activation::tanh:
      return pre.array().tanh().matrix();
    case Activation::linear:
      return pre;
  }
  return pre;
}

}  // namespace

MlpParams init_mlp(std::span<const int> widths, Activation hidden, Activation output, Rng& rng) {
  if (widths.size() < 2) throw DimensionError("init_mlp: need at least input and output widths");
  MlpParams p;
  const size_t count = widths.size() - 1;
  for (size_t k = 0; k < count; ++k) {
    const int in = widths[k], out = widths[k + 1];
    const double limit = std::sqrt(6.0 / static_cast<double>(in + out));
    std::uniform_real_distribution<double> u(-limit, limit);
    DenseLayer l;
    l.weight.resize(out, in);
    for (int r = 0; r < out; ++r) {
      for (int c = 0; c < in; ++c) l.weight(r, c) = u(rng);
    }
    l.bias = Vector::Zero(out);
    l.act = layer_act(k, count, hidden, output);
    p.layers.push_back(std::move(l));
  }
  return p;
}

MlpParams zero_mlp(std::span<const int> widths, Activation hidden, Activation output) {
  if (widths.size() < 2) throw DimensionError("zero_mlp: need at least input and output widths");
  MlpParams p;
  const size_t count = widths.size() - 1;
  for (size_t k = 0; k < count; ++k) {
    p.layers.push_back({Matrix::Zero(widths[k + 1], widths[k]), Vector::Zero(widths[k + 1]),
                        layer_act(k, count, hidden, output)});
  }
  return p;
}

Vector flatten(const MlpParams& params) {
  Vector flat(static_cast<Eigen::Index>(params.parameter_count()));
  Eigen::Index off = 0;
  for (const DenseLayer& l : params.layers) {
    for (Eigen::Index r = 0; r < l.weight.rows(); ++r) {
      for (Eigen::Index c = 0; c < l.weight.cols(); ++c) flat(off++) = l.weight(r, c);
    }
    flat.segment(off, l.bias.size()) = l.bias;
    off += l.bias.size();
  }
  return flat;
}

void unflatten(MlpParams& params, const Vector& flat) {
  if (flat.size() != static_cast<Eigen::Index>(params.parameter_count())) {
    throw DimensionError("unflatten: parameter count mismatch");
  }
  Eigen::Index off = 0;
  for (DenseLayer& l : params.layers) {
    for (Eigen::Index r = 0; r < l.weight.rows(); ++r) {
      for (Eigen::Index c = 0; c < l.weight.cols(); ++c) l.weight(r, c) = flat(off++);
    }
    l.bias = flat.segment(off, l.bias.size());
    off += l.bias.size();
  }
}

Matrix mlp_forward(const MlpParams& params, const Matrix& inputs) {
  if (inputs.rows() != params.input_dim()) {
    throw DimensionError("mlp_forward: input width " + std::to_string(inputs.rows()) +
                         " != " + std::to_string(params.input_dim()));
  }
  Matrix h = inputs;
  for (const DenseLayer& l : params.layers) {
    Matrix pre = l.weight * h;
    pre.colwise() += l.bias;
    h = activate(pre, l.act);
  }
  return h;
}

MlpBinding bind(ad::Tape& tape, const MlpParams& params, bool trainable) {
  MlpBinding b;
  for (const DenseLayer& l : params.layers) {
    b.weights.push_back(trainable ? tape.variable(l.weight) : tape.constant(l.weight));
    b.biases.push_back(trainable ? tape.variable(l.bias) : tape.constant(l.bias));
  }
  return b;
}

MlpTrace mlp_forward(const MlpParams& params, const MlpBinding& binding, ad::Var inputs) {
  if (inputs.rows() != params.input_dim()) {
    throw DimensionError("mlp_forward: input width " + std::to_string(inputs.rows()) +
                         " != " + std::to_string(params.input_dim()));
  }
  MlpTrace trace;
  ad::Var h = inputs;
  for (size_t k = 0; k < params.layers.size(); ++k) {
    ad::Var pre = ad::add_col_broadcast(ad::matmul(binding.weights[k], h), binding.biases[k]);
    trace.pre_activations.push_back(pre);
    switch (params.layers[k].act) {
      case Activation::leaky_relu:
        h = ad::leaky_relu(pre, kLeakySlope);
        break;
      case Activation::tanh:
        h = ad::tanh(pre);
        break;
      case Activation::linear:
        h = pre;
        break;
    }
  }
  trace.output = h;
  return trace;
}

ad::Var mlp_input_gradient(const MlpParams& params, const MlpBinding& binding,
                           const MlpTrace& trace) {
  if (params.output_dim() != 1) {
    throw DimensionError("mlp_input_gradient: network must have a single output");
  }
  ad::Tape& tape = trace.output.tape();
  const Eigen::Index batch = trace.output.cols();
  // Adjoint of the output row, then pulled back layer by layer.
  ad::Var g = tape.constant(Matrix::Ones(1, batch));
  for (size_t k = params.layers.size(); k-- > 0;) {
    const ad::Var& pre = trace.pre_activations[k];
    switch (params.layers[k].act) {
      case Activation::leaky_relu: {
        // Piecewise-constant derivative: no dependence on the parameters.
        const Matrix mask = pre.value().unaryExpr([](double x) { return x > 0.0 ? 1.0 : kLeakySlope; });
        g = ad::hadamard(g, tape.constant(mask));
        break;
      }
      case Activation::tanh: {
        const ad::Var t = ad::tanh(pre);
        const ad::Var d = ad::add_scalar(ad::scale(ad::square(t), -1.0), 1.0);
        g = ad::hadamard(g, d);
        break;
      }
      case Activation::linear:
        break;
    }
    g = ad::matmul(ad::transpose(binding.weights[k]), g);
  }
  return g;
}

Vector binding_gradient(const ad::Tape& tape, const MlpBinding& binding) {
  Eigen::Index total = 0;
  for (size_t k = 0; k < binding.weights.size(); ++k) {
    total += binding.weights[k].value().size() + binding.biases[k].value().size();
  }
  Vector flat(total);
  Eigen::Index off = 0;
  for (size_t k = 0; k < binding.weights.size(); ++k) {
    const Matrix gw = tape.gradient(binding.weights[k]);
    for (Eigen::Index r = 0; r < gw.rows(); ++r) {
      for (Eigen::Index c = 0; c < gw.cols(); ++c) flat(off++) = gw(r, c);
    }
    const Matrix gb = tape.gradient(binding.biases[k]);
    flat.segment(off, gb.size()) = gb.col(0);
    off += gb.size();
  }
  return flat;
}

AdamState AdamState::for_size(Eigen::Index size, double learning_rate) {
  AdamState s;
  s.m = Vector::Zero(size);
  s.v = Vector::Zero(size);
  s.learning_rate = learning_rate;
  return s;
}

void adam_step(std::span<double> params, std::span<const double> grads, AdamState& state) {
  const auto n = static_cast<Eigen::Index>(params.size());
  if (static_cast<Eigen::Index>(grads.size()) != n || state.m.size() != n || state.v.size() != n) {
    throw DimensionError("adam_step: parameter, gradient and moment sizes differ");
  }
  state.t += 1;
  const double c1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.t));
  const double c2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.t));
  for (Eigen::Index i = 0; i < n; ++i) {
    const double g = grads[i];
    state.m(i) = state.beta1 * state.m(i) + (1.0 - state.beta1) * g;
    state.v(i) = state.beta2 * state.v(i) + (1.0 - state.beta2) * g * g;
    const double mhat = state.m(i) / c1;
    const double vhat = state.v(i) / c2;
    params[i] -= state.learning_rate * mhat / (std::sqrt(vhat) + state.epsilon);
  }
}

void adam_step(MlpParams& params, const Vector& grads, AdamState& state) {
  Vector flat = flatten(params);
  adam_step(std::span<double>(flat.data(), flat.size()),
            std::span<const double>(grads.data(), grads.size()), state);
  unflatten(params, flat);
}

Vector sample_noise(Rng& rng, int dim) {
  if (dim <= 0) throw DimensionError("sample_noise: dimension must be positive");
  std::normal_distribution<double> normal(0.0, 1.0);
  Vector z(dim);
  for (int i = 0; i < dim; ++i) z(i) = normal(rng);
  return z;
}

Vector one_hot(int c, int num_classes) {
  if (c < 0 || c >= num_classes) {
    throw DimensionError("one_hot: class " + std::to_string(c) + " outside [0, " +
                         std::to_string(num_classes) + ")");
  }
  Vector v = Vector::Zero(num_classes);
  v(c) = 1.0;
  return v;
}

std::string rng_state(const Rng& rng) {
  std::ostringstream os;
  os << rng;
  return os.str();
}

void set_rng_state(Rng& rng, const std::string& state) {
  std::istringstream is(state);
  is >> rng;
  if (!is) throw DataError("malformed rng state");
}

std::string network_checkpoint_to_json(const NetworkCheckpoint& ckpt) {
  detail::json j = detail::network_to_json(ckpt.params, ckpt.adam);
  j["version"] = 1;
  j["rng_state"] = ckpt.rng_state;
  return j.dump() + "\n";
}

NetworkCheckpoint network_checkpoint_from_json(const std::string& text, const std::string& source) {
  const detail::json j = detail::parse_json(text, source);
  const int version = detail::get_int(detail::member(j, "version", source, "$"), source, "$.version");
  if (version != 1) detail::field_error(source, "$.version", "unsupported checkpoint version " + std::to_string(version));
  NetworkCheckpoint ckpt;
  detail::network_from_json(j, source, "$", ckpt.params, ckpt.adam);
  ckpt.rng_state = detail::get_string(detail::member(j, "rng_state", source, "$"), source, "$.rng_state");
  return ckpt;
}

}  // namespace spdgan
