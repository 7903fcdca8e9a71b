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

#include "json_util.hpp"

#include <algorithm>

namespace spdgan::detail {

void field_error(const std::string& source, const std::string& field, const std::string& what) {
  throw DataError(source + ": " + field + ": " + what);
}

const json& member(const json& obj, const char* key, const std::string& source, const std::string& path) {
  if (!obj.is_object()) field_error(source, path, "expected an object");
  auto it = obj.find(key);
  if (it == obj.end()) field_error(source, path + "." + key, "missing field");
  return *it;
}

json parse_json(const std::string& text, const std::string& source) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    const size_t pos = std::min<size_t>(e.byte == 0 ? 0 : e.byte - 1, text.size());
    const long line = 1 + std::count(text.begin(), text.begin() + static_cast<long>(pos), '\n');
    throw DataError(source + ":" + std::to_string(line) + ": malformed JSON (" + e.what() + ")");
  }
}

double get_number(const json& j, const std::string& source, const std::string& path) {
  if (!j.is_number()) field_error(source, path, "expected a number");
  return j.get<double>();
}

int get_int(const json& j, const std::string& source, const std::string& path) {
  if (!j.is_number_integer()) field_error(source, path, "expected an integer");
  return j.get<int>();
}

std::string get_string(const json& j, const std::string& source, const std::string& path) {
  if (!j.is_string()) field_error(source, path, "expected a string");
  return j.get<std::string>();
}

json matrix_to_json(const Matrix& m) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

Matrix matrix_from_json(const json& j, const std::string& source, const std::string& path) {
  if (!j.is_array() || j.empty()) field_error(source, path, "expected a non-empty array of rows");
  const size_t cols = j[0].is_array() ? j[0].size() : 0;
  Matrix m(j.size(), cols);
  for (size_t r = 0; r < j.size(); ++r) {
    const std::string rp = path + "[" + std::to_string(r) + "]";
    if (!j[r].is_array() || j[r].size() != cols) field_error(source, rp, "ragged row");
    for (size_t c = 0; c < cols; ++c) m(r, c) = get_number(j[r][c], source, rp + "[" + std::to_string(c) + "]");
  }
  return m;
}

json vector_to_json(const Vector& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v(i));
  return a;
}

Vector vector_from_json(const json& j, const std::string& source, const std::string& path) {
  if (!j.is_array()) field_error(source, path, "expected an array");
  Vector v(j.size());
  for (size_t i = 0; i < j.size(); ++i) v(i) = get_number(j[i], source, path + "[" + std::to_string(i) + "]");
  return v;
}

json network_to_json(const MlpParams& params, const AdamState& adam) {
  json j;
  j["arch"] = params.architecture();
  json layers = json::array();
  for (const DenseLayer& l : params.layers) {
    json jl;
    // weights flattened row-major
    json w = json::array();
    for (Eigen::Index r = 0; r < l.weight.rows(); ++r) {
      for (Eigen::Index c = 0; c < l.weight.cols(); ++c) w.push_back(l.weight(r, c));
    }
    jl["w"] = std::move(w);
    jl["b"] = vector_to_json(l.bias);
    jl["act"] = to_string(l.act);
    jl["shape"] = {l.weight.rows(), l.weight.cols()};
    layers.push_back(std::move(jl));
  }
  j["layers"] = std::move(layers);
  json ja;
  ja["t"] = adam.t;
  ja["learning_rate"] = adam.learning_rate;
  ja["beta1"] = adam.beta1;
  ja["beta2"] = adam.beta2;
  ja["epsilon"] = adam.epsilon;
  ja["m"] = vector_to_json(adam.m);
  ja["v"] = vector_to_json(adam.v);
  j["adam"] = std::move(ja);
  return j;
}

void network_from_json(const json& j, const std::string& source, const std::string& path, MlpParams& params,
                       AdamState& adam) {
  const json& layers = member(j, "layers", source, path);
  if (!layers.is_array() || layers.empty()) field_error(source, path + ".layers", "expected a non-empty array");
  params.layers.clear();
  for (size_t k = 0; k < layers.size(); ++k) {
    const std::string lp = path + ".layers[" + std::to_string(k) + "]";
    const json& jl = layers[k];
    const json& shape = member(jl, "shape", source, lp);
    if (!shape.is_array() || shape.size() != 2) field_error(source, lp + ".shape", "expected [rows, cols]");
    const int rows = get_int(shape[0], source, lp + ".shape[0]");
    const int cols = get_int(shape[1], source, lp + ".shape[1]");
    if (rows <= 0 || cols <= 0) field_error(source, lp + ".shape", "dimensions must be positive");
    const Vector w = vector_from_json(member(jl, "w", source, lp), source, lp + ".w");
    if (w.size() != static_cast<Eigen::Index>(rows) * cols) field_error(source, lp + ".w", "length does not match shape");
    DenseLayer layer;
    layer.weight = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
        w.data(), rows, cols);
    layer.bias = vector_from_json(member(jl, "b", source, lp), source, lp + ".b");
    if (layer.bias.size() != rows) field_error(source, lp + ".b", "length does not match shape");
    try {
      layer.act = parse_activation(get_string(member(jl, "act", source, lp), source, lp + ".act"));
    } catch (const DataError& e) {
      field_error(source, lp + ".act", e.what());
    }
    params.layers.push_back(std::move(layer));
  }
  try {
    params.validate();
  } catch (const DimensionError& e) {
    field_error(source, path + ".layers", e.what());
  }
  const std::string ap = path + ".adam";
  const json& ja = member(j, "adam", source, path);
  adam.t = member(ja, "t", source, ap).get<long long>();
  adam.learning_rate = get_number(member(ja, "learning_rate", source, ap), source, ap + ".learning_rate");
  adam.beta1 = get_number(member(ja, "beta1", source, ap), source, ap + ".beta1");
  adam.beta2 = get_number(member(ja, "beta2", source, ap), source, ap + ".beta2");
  adam.epsilon = get_number(member(ja, "epsilon", source, ap), source, ap + ".epsilon");
  adam.m = vector_from_json(member(ja, "m", source, ap), source, ap + ".m");
  adam.v = vector_from_json(member(ja, "v", source, ap), source, ap + ".v");
  const auto count = static_cast<Eigen::Index>(params.parameter_count());
  if (adam.m.size() != count || adam.v.size() != count) {
    field_error(source, ap, "moment length does not match the parameter count");
  }
}

}  // namespace spdgan::detail
