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

// spdgan command-line front end. Thin layer over the C API: parse flags,
// apply overrides to the config, run one command, map the status to an exit
// code.

#include <cstdio>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "spdgan/spdgan.h"

namespace {

struct Overrides {
  std::string config_path;
  std::vector<std::string> sets;  // key=json
  std::optional<uint64_t> seed;
  std::optional<std::string> out, data, checkpoint, real, generated;
  std::optional<std::vector<int>> counts;
  bool echo_log = false;
};

int exit_code(spdgan_status s) {
  switch (s) {
    case SPDGAN_OK:
      return 0;
    case SPDGAN_ERR_CONFIG:
      return 1;
    case SPDGAN_ERR_DATA:
    case SPDGAN_ERR_INVALID_ARGUMENT:
      return 2;
    case SPDGAN_ERR_NUMERICAL:
      return 3;
    default:
      return 4;
  }
}

int report(spdgan_status s) {
  if (s != SPDGAN_OK) std::cerr << "spdgan: error: " << spdgan_last_error() << "\n";
  return exit_code(s);
}

spdgan_status set_string(spdgan_config* cfg, const char* key, const std::string& value) {
  return spdgan_config_set(cfg, key, nlohmann::json(value).dump().c_str());
}

spdgan_status build_config(const Overrides& o, spdgan_config** out) {
  spdgan_status s = o.config_path.empty() ? spdgan_config_default(out) : spdgan_config_load(o.config_path.c_str(), out);
  if (s != SPDGAN_OK) return s;
  spdgan_config* cfg = *out;
  for (const auto& kv : o.sets) {
    auto eq = kv.find('=');
    if (eq == std::string::npos) {
      std::cerr << "spdgan: error: --set expects key=value, got '" << kv << "'\n";
      return SPDGAN_ERR_CONFIG;
    }
    if ((s = spdgan_config_set(cfg, kv.substr(0, eq).c_str(), kv.substr(eq + 1).c_str())) != SPDGAN_OK) return s;
  }
  if (o.seed && (s = spdgan_config_set(cfg, "seed", std::to_string(*o.seed).c_str())) != SPDGAN_OK) return s;
  if (o.out && (s = set_string(cfg, "out_dir", *o.out)) != SPDGAN_OK) return s;
  if (o.data && (s = set_string(cfg, "data.path", *o.data)) != SPDGAN_OK) return s;
  if (o.checkpoint && (s = set_string(cfg, "checkpoint.path", *o.checkpoint)) != SPDGAN_OK) return s;
  if (o.real && (s = set_string(cfg, "gscore.real", *o.real)) != SPDGAN_OK) return s;
  if (o.generated && (s = set_string(cfg, "gscore.generated", *o.generated)) != SPDGAN_OK) return s;
  if (o.counts && (s = spdgan_config_set(cfg, "generate.counts", nlohmann::json(*o.counts).dump().c_str())) != SPDGAN_OK)
    return s;
  return SPDGAN_OK;
}

void print_line(const char* line, void*) { std::puts(line); }

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Graph-regularized conditional WGAN-GP for SPD matrices"};
  app.set_version_flag("--version", spdgan_version());
  app.require_subcommand(1);

  Overrides o;
  auto common = [&](CLI::App* sub) {
    sub->add_option("--config", o.config_path, "JSON config file")->check(CLI::ExistingFile);
    sub->add_option("--seed", o.seed, "Override the config seed");
    sub->add_option("--out", o.out, "Output directory");
    sub->add_option("--set", o.sets, "Override one config key, e.g. train.epochs=3 (repeatable)");
  };

  auto* synth = app.add_subcommand("synth-data", "Write the synthetic SPD benchmark");
  auto* train = app.add_subcommand("train", "Train the generator and critic");
  auto* gen = app.add_subcommand("generate", "Sample synthetic matrices from a checkpoint");
  auto* gs = app.add_subcommand("gscore", "Geometry score between real and generated sets");
  auto* aug = app.add_subcommand("augment-eval", "Cross-validated augmentation experiment");
  auto* pipe = app.add_subcommand("pipeline", "Run every stage in order");
  for (auto* sub : {synth, train, gen, gs, aug, pipe}) common(sub);

  for (auto* sub : {train, aug, pipe}) sub->add_option("--data", o.data, "Dataset file");
  train->add_option("--checkpoint", o.checkpoint, "Checkpoint output path");
  train->add_flag("--print-log", o.echo_log, "Echo training log lines to stdout");
  gen->add_option("--checkpoint", o.checkpoint, "Checkpoint to load");
  gen->add_option("--counts", o.counts, "Samples per class, e.g. --counts 200,200")->delimiter(',');
  gs->add_option("--real", o.real, "Real dataset file");
  gs->add_option("--generated", o.generated, "Generated dataset file");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 1;
  }

  spdgan_config* cfg = nullptr;
  spdgan_status s = build_config(o, &cfg);
  if (s == SPDGAN_OK) {
    if (synth->parsed())
      s = spdgan_cmd_synth_data(cfg);
    else if (train->parsed())
      s = spdgan_cmd_train(cfg, o.echo_log ? print_line : nullptr, nullptr);
    else if (gen->parsed())
      s = spdgan_cmd_generate(cfg);
    else if (gs->parsed())
      s = spdgan_cmd_gscore(cfg);
    else if (aug->parsed())
      s = spdgan_cmd_augment_eval(cfg);
    else
      s = spdgan_cmd_pipeline(cfg);
  }
  spdgan_config_free(cfg);
  return report(s);
}
