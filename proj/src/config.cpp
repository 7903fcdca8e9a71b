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

#include "spdgan/config.hpp"

#include <cmath>
#include <functional>
#include <map>

#include "json.hpp"
#include "spdgan/data.hpp"

namespace spdgan {

namespace {

using nlohmann::json;
using nlohmann::ordered_json;

struct Key {
  std::function<json(const RunConfig&)> get;
  std::function<void(RunConfig&, const json&)> set;
};

[[noreturn]] void bad(const std::string& key, const std::string& what) {
  throw ConfigError("config key '" + key + "': " + what);
}

double as_number(const std::string& key, const json& v) {
  if (!v.is_number()) bad(key, "expected a number, got " + v.dump());
  return v.get<double>();
}

int as_int(const std::string& key, const json& v) {
  if (!v.is_number_integer()) bad(key, "expected an integer, got " + v.dump());
  auto x = v.get<long long>();
  if (x < -2147483647LL || x > 2147483647LL) bad(key, "integer out of range");
  return static_cast<int>(x);
}

std::uint64_t as_seed(const std::string& key, const json& v) {
  if (v.is_number_unsigned()) return v.get<std::uint64_t>();
  if (v.is_number_integer()) bad(key, "seed must be non-negative");
  bad(key, "expected an unsigned integer, got " + v.dump());
}

std::string as_string(const std::string& key, const json& v) {
  if (!v.is_string()) bad(key, "expected a string, got " + v.dump());
  return v.get<std::string>();
}

std::vector<int> as_int_list(const std::string& key, const json& v) {
  if (!v.is_array()) bad(key, "expected an array of integers, got " + v.dump());
  std::vector<int> out;
  for (const auto& e : v) out.push_back(as_int(key, e));
  return out;
}

std::optional<double> as_optional(const std::string& key, const json& v) {
  if (v.is_null()) return std::nullopt;
  return as_number(key, v);
}

json optional_json(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

// The enum parsers throw DataError; a bad name in a config is a config error.
template <class F>
auto enum_value(const std::string& key, const json& v, F parse) {
  auto name = as_string(key, v);
  try {
    return parse(name);
  } catch (const Error& e) {
    bad(key, e.what());
  }
}

const std::map<std::string, Key>& keys() {
  static const std::map<std::string, Key> table = [] {
    std::map<std::string, Key> t;
    auto add = [&](const std::string& name, std::function<json(const RunConfig&)> get,
                   std::function<void(RunConfig&, const std::string&, const json&)> set) {
      t[name] = Key{std::move(get), [name, set](RunConfig& c, const json& v) { set(c, name, v); }};
    };

    add("seed", [](const RunConfig& c) { return json(c.seed); },
        [](RunConfig& c, const std::string& k, const json& v) { c.seed = as_seed(k, v); });
    add("out_dir", [](const RunConfig& c) { return json(c.out_dir); },
        [](RunConfig& c, const std::string& k, const json& v) { c.out_dir = as_string(k, v); });

    add("data.path", [](const RunConfig& c) { return json(c.data_path); },
        [](RunConfig& c, const std::string& k, const json& v) { c.data_path = as_string(k, v); });
    add("data.n", [](const RunConfig& c) { return json(c.synth.n); },
        [](RunConfig& c, const std::string& k, const json& v) { c.synth.n = as_int(k, v); });
    add("data.per_class", [](const RunConfig& c) { return json(c.synth.per_class); },
        [](RunConfig& c, const std::string& k, const json& v) { c.synth.per_class = as_int_list(k, v); });
    add("data.spread", [](const RunConfig& c) { return json(c.synth.spread); },
        [](RunConfig& c, const std::string& k, const json& v) { c.synth.spread = as_number(k, v); });
    add("data.class_sep", [](const RunConfig& c) { return json(c.synth.class_sep); },
        [](RunConfig& c, const std::string& k, const json& v) { c.synth.class_sep = as_number(k, v); });

    add("train.batch_size", [](const RunConfig& c) { return json(c.train.batch_size); },
        [](RunConfig& c, const std::string& k, const json& v) { c.train.batch_size = as_int(k, v); });
    add("train.epochs", [](const RunConfig& c) { return json(c.train.epochs); },
        [](RunConfig& c, const std::string& k, const json& v) { c.train.epochs = as_int(k, v); });
    add("train.critic_iters", [](const RunConfig& c) { return json(c.train.critic_iters); },
        [](RunConfig& c, const std::string& k, const json& v) { c.train.critic_iters = as_int(k, v); });
    add("train.learning_rate", [](const RunConfig& c) { return json(c.train.learning_rate); },
        [](RunConfig& c, const std::string& k, const json& v) { c.train.learning_rate = as_number(k, v); });
    add("train.base_point_mode", [](const RunConfig& c) { return json(to_string(c.train.base_point_mode)); },
        [](RunConfig& c, const std::string& k, const json& v) {
          c.train.base_point_mode = enum_value(k, v, parse_base_point_mode);
        });

    add("loss.alpha1", [](const RunConfig& c) { return json(c.weights.alpha1); },
        [](RunConfig& c, const std::string& k, const json& v) { c.weights.alpha1 = as_number(k, v); });
    add("loss.alpha2", [](const RunConfig& c) { return json(c.weights.alpha2); },
        [](RunConfig& c, const std::string& k, const json& v) { c.weights.alpha2 = as_number(k, v); });
    add("loss.alpha3", [](const RunConfig& c) { return json(c.weights.alpha3); },
        [](RunConfig& c, const std::string& k, const json& v) { c.weights.alpha3 = as_number(k, v); });
    add("loss.alpha4", [](const RunConfig& c) { return json(c.weights.alpha4); },
        [](RunConfig& c, const std::string& k, const json& v) { c.weights.alpha4 = as_number(k, v); });
    add("loss.alpha5", [](const RunConfig& c) { return json(c.weights.alpha5); },
        [](RunConfig& c, const std::string& k, const json& v) { c.weights.alpha5 = as_number(k, v); });
    add("loss.lambda", [](const RunConfig& c) { return json(c.weights.lambda); },
        [](RunConfig& c, const std::string& k, const json& v) { c.weights.lambda = as_number(k, v); });

    add("gen.noise_dim", [](const RunConfig& c) { return json(c.train.noise_dim); },
        [](RunConfig& c, const std::string& k, const json& v) { c.train.noise_dim = as_int(k, v); });
    add("gen.hidden", [](const RunConfig& c) { return json(c.train.generator_hidden); },
        [](RunConfig& c, const std::string& k, const json& v) { c.train.generator_hidden = as_int_list(k, v); });
    add("gen.output_scale", [](const RunConfig& c) { return optional_json(c.train.output_scale); },
        [](RunConfig& c, const std::string& k, const json& v) { c.train.output_scale = as_optional(k, v); });
    add("critic.hidden", [](const RunConfig& c) { return json(c.train.critic_hidden); },
        [](RunConfig& c, const std::string& k, const json& v) { c.train.critic_hidden = as_int_list(k, v); });

    add("graph.metric", [](const RunConfig& c) { return json(to_string(c.train.graph_metric)); },
        [](RunConfig& c, const std::string& k, const json& v) {
          c.train.graph_metric = enum_value(k, v, parse_graph_metric);
        });
    add("graph.sigma", [](const RunConfig& c) { return optional_json(c.train.graph_sigma); },
        [](RunConfig& c, const std::string& k, const json& v) { c.train.graph_sigma = as_optional(k, v); });
    add("graph.knn", [](const RunConfig& c) { return json(c.train.graph_knn); },
        [](RunConfig& c, const std::string& k, const json& v) { c.train.graph_knn = as_int(k, v); });

    add("checkpoint.path", [](const RunConfig& c) { return json(c.checkpoint_path); },
        [](RunConfig& c, const std::string& k, const json& v) { c.checkpoint_path = as_string(k, v); });
    add("generate.counts", [](const RunConfig& c) { return json(c.generate_counts); },
        [](RunConfig& c, const std::string& k, const json& v) { c.generate_counts = as_int_list(k, v); });

    add("gscore.real", [](const RunConfig& c) { return json(c.gscore_real); },
        [](RunConfig& c, const std::string& k, const json& v) { c.gscore_real = as_string(k, v); });
    add("gscore.generated", [](const RunConfig& c) { return json(c.gscore_generated); },
        [](RunConfig& c, const std::string& k, const json& v) { c.gscore_generated = as_string(k, v); });
    add("gscore.landmarks", [](const RunConfig& c) { return json(c.gscore.witness.landmarks); },
        [](RunConfig& c, const std::string& k, const json& v) { c.gscore.witness.landmarks = as_int(k, v); });
    add("gscore.alpha_frac", [](const RunConfig& c) { return json(c.gscore.witness.alpha_frac); },
        [](RunConfig& c, const std::string& k, const json& v) { c.gscore.witness.alpha_frac = as_number(k, v); });
    add("gscore.complex", [](const RunConfig& c) { return json(to_string(c.gscore.witness.complex)); },
        [](RunConfig& c, const std::string& k, const json& v) {
          c.gscore.witness.complex = enum_value(k, v, parse_complex_kind);
        });
    add("gscore.nu", [](const RunConfig& c) { return json(c.gscore.witness.nu); },
        [](RunConfig& c, const std::string& k, const json& v) { c.gscore.witness.nu = as_int(k, v); });
    add("gscore.runs", [](const RunConfig& c) { return json(c.gscore.runs); },
        [](RunConfig& c, const std::string& k, const json& v) { c.gscore.runs = as_int(k, v); });
    add("gscore.i_max", [](const RunConfig& c) { return json(c.gscore.i_max); },
        [](RunConfig& c, const std::string& k, const json& v) { c.gscore.i_max = as_int(k, v); });

    add("augment.folds", [](const RunConfig& c) { return json(c.augment_folds); },
        [](RunConfig& c, const std::string& k, const json& v) { c.augment_folds = as_int(k, v); });
    add("augment.multipliers", [](const RunConfig& c) { return json(c.augment_multipliers); },
        [](RunConfig& c, const std::string& k, const json& v) { c.augment_multipliers = as_int_list(k, v); });
    add("classifier.l2", [](const RunConfig& c) { return json(c.classifier.l2); },
        [](RunConfig& c, const std::string& k, const json& v) { c.classifier.l2 = as_number(k, v); });
    add("classifier.steps", [](const RunConfig& c) { return json(c.classifier.steps); },
        [](RunConfig& c, const std::string& k, const json& v) { c.classifier.steps = as_int(k, v); });
    add("classifier.learning_rate", [](const RunConfig& c) { return json(c.classifier.learning_rate); },
        [](RunConfig& c, const std::string& k, const json& v) { c.classifier.learning_rate = as_number(k, v); });
    return t;
  }();
  return table;
}

std::string join(const std::string& dir, const std::string& file) {
  if (dir.empty()) return file;
  return dir.back() == '/' ? dir + file : dir + "/" + file;
}

void apply(RunConfig& cfg, const std::string& key, const json& value) {
  auto it = keys().find(key);
  if (it == keys().end()) throw ConfigError("unknown config key '" + key + "'");
  it->second.set(cfg, value);
}

}  // namespace

std::string RunConfig::resolved_data_path() const {
  return data_path.empty() ? join(out_dir, "dataset.json") : data_path;
}

std::string RunConfig::resolved_checkpoint_path() const {
  return checkpoint_path.empty() ? join(out_dir, "checkpoint.json") : checkpoint_path;
}

std::string RunConfig::resolved_real_path() const {
  return gscore_real.empty() ? resolved_data_path() : gscore_real;
}

std::string RunConfig::resolved_generated_path() const {
  return gscore_generated.empty() ? join(out_dir, "synthetic.json") : gscore_generated;
}

AugmentConfig RunConfig::augment_config() const {
  AugmentConfig a;
  a.folds = augment_folds;
  a.multipliers = augment_multipliers;
  a.seed = seed;
  a.gan = train;
  a.weights = weights;
  a.classifier = classifier;
  return a;
}

void RunConfig::propagate_seed() {
  synth.seed = seed;
  train.seed = seed;
  gscore.seed = seed;
}

void RunConfig::validate() const {
  if (out_dir.empty()) throw ConfigError("config key 'out_dir': must not be empty");
  if (synth.n < 1) throw ConfigError("config key 'data.n': must be >= 1");
  if (synth.per_class.empty()) throw ConfigError("config key 'data.per_class': needs at least one class");
  for (int c : synth.per_class)
    if (c < 0) throw ConfigError("config key 'data.per_class': counts must be >= 0");
  if (!(synth.spread >= 0) || !std::isfinite(synth.spread))
    throw ConfigError("config key 'data.spread': must be finite and >= 0");
  if (!(synth.class_sep >= 0) || !std::isfinite(synth.class_sep))
    throw ConfigError("config key 'data.class_sep': must be finite and >= 0");
  train.validate();
  weights.validate();
  for (int c : generate_counts)
    if (c < 0) throw ConfigError("config key 'generate.counts': counts must be >= 0");
  gscore.validate();
  augment_config().validate();
}

bool operator==(const RunConfig& a, const RunConfig& b) {
  for (const auto& [name, key] : keys())
    if (key.get(a) != key.get(b)) return false;
  return true;
}

void set_config_value(RunConfig& cfg, const std::string& key, const std::string& json_value) {
  json v = json::parse(json_value, nullptr, false);
  if (v.is_discarded()) throw ConfigError("config key '" + key + "': value is not valid JSON: " + json_value);
  apply(cfg, key, v);
  cfg.propagate_seed();
}

RunConfig parse_config(const std::string& text, const std::string& source) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(source + ": invalid JSON: " + e.what());
  }
  if (!j.is_object()) throw ConfigError(source + ": config must be a JSON object");
  RunConfig cfg;
  for (const auto& [key, value] : j.items()) {
    try {
      apply(cfg, key, value);
    } catch (const ConfigError& e) {
      throw ConfigError(source + ": " + e.what());
    }
  }
  cfg.propagate_seed();
  try {
    cfg.validate();
  } catch (const ConfigError& e) {
    throw ConfigError(source + ": " + e.what());
  }
  return cfg;
}

RunConfig load_config(const std::string& path) {
  std::string text;
  try {
    text = read_text_file(path);
  } catch (const Error& e) {
    throw ConfigError(e.what());
  }
  return parse_config(text, path);
}

std::string config_to_json(const RunConfig& cfg) {
  ordered_json out = ordered_json::object();
  for (const auto& [name, key] : keys()) out[name] = ordered_json::parse(key.get(cfg).dump());
  return out.dump(2) + "\n";
}

std::vector<std::string> config_keys() {
  std::vector<std::string> out;
  for (const auto& [name, key] : keys()) out.push_back(name);
  return out;
}

}  // namespace spdgan
