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

// JSON helpers shared by the checkpoint and report writers. Not installed.

#pragma once

#include <string>

#include "json.hpp"
#include "spdgan/mlp.hpp"

namespace spdgan::detail {

using nlohmann::json;

[[noreturn]] void field_error(const std::string& source, const std::string& field, const std::string& what);
const json& member(const json& obj, const char* key, const std::string& source, const std::string& path);

json parse_json(const std::string& text, const std::string& source);

double get_number(const json& j, const std::string& source, const std::string& path);
int get_int(const json& j, const std::string& source, const std::string& path);
std::string get_string(const json& j, const std::string& source, const std::string& path);

json matrix_to_json(const Matrix& m);
Matrix matrix_from_json(const json& j, const std::string& source, const std::string& path);
json vector_to_json(const Vector& v);
Vector vector_from_json(const json& j, const std::string& source, const std::string& path);

json network_to_json(const MlpParams& params, const AdamState& adam);
void network_from_json(const json& j, const std::string& source, const std::string& path, MlpParams& params,
                       AdamState& adam);

}  // namespace spdgan::detail
