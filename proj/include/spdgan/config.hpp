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

// Run configuration: a flat JSON object with dotted keys. Missing keys take
// the defaults below; unknown keys are rejected.

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "spdgan/augment.hpp"
#include "spdgan/gan.hpp"
#include "spdgan/gscore.hpp"

namespace spdgan {

struct RunConfig {
  std::uint64_t seed = 0;
  std::string out_dir = "out";

  // Dataset file read by train, gscore and augment-eval; empty means
  // <out_dir>/dataset.json.
  std::string data_path;
  SynthOptions synth;  // synth.seed mirrors `seed`

  TrainConfig train;  // train.seed mirrors `seed`
  LossWeights weights;

  std::string checkpoint_path;  // empty: <out_dir>/checkpoint.json
  std::vector<int> generate_counts{200, 200};

  // empty: data path / <out_dir>/synthetic.json
  std::string gscore_real;
  std::string gscore_generated;
  GscoreParams gscore;  // gscore.seed mirrors `seed`

  int augment_folds = 5;
  std::vector<int> augment_multipliers{0, 1, 2, 3};
  ClassifierParams classifier;

  std::string resolved_data_path() const;
  std::string resolved_checkpoint_path() const;
  std::string resolved_real_path() const;
  std::string resolved_generated_path() const;
  AugmentConfig augment_config() const;

  /// Range checks on every field; throws ConfigError.
  void validate() const;
  /// Copies `seed` into the per-module seeds.
  void propagate_seed();
};

bool operator==(const RunConfig& a, const RunConfig& b);

/// Parses and validates; `source` names the file in error messages.
RunConfig parse_config(const std::string& text, const std::string& source = "<config>");
RunConfig load_config(const std::string& path);
/// Sets one dotted key from a JSON value, e.g. ("train.epochs", "3").
void set_config_value(RunConfig& cfg, const std::string& key, const std::string& json_value);
/// Every key with its resolved value, keys sorted.
std::string config_to_json(const RunConfig& cfg);
/// Documented keys in sorted order.
std::vector<std::string> config_keys();

}  // namespace spdgan
