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

// Batch commands. Each one creates out_dir, echoes the resolved config to
// out_dir/config.resolved.json and records wall-clock times in
// out_dir/metadata_<command>.json. Everything else it writes depends only on
// the config and its input files.

#pragma once

#include <functional>
#include <string>
#include <vector>

#include "spdgan/config.hpp"

namespace spdgan {

struct CommandResult {
  std::vector<std::string> outputs;  // files written, metadata excluded
};

/// dataset.json and centers.json in out_dir.
CommandResult cmd_synth_data(const RunConfig& cfg);
/// Trains on the configured dataset; checkpoint plus out_dir/train_log.jsonl,
/// which is streamed so a diverged run leaves its log behind.
CommandResult cmd_train(const RunConfig& cfg,
                        const std::function<void(const TrainRecord&)>& on_record = {});
/// out_dir/synthetic.json with generate.counts samples per class.
CommandResult cmd_generate(const RunConfig& cfg);
/// out_dir/gscore.json and out_dir/mrlt.csv. Clouds live in the tangent space
/// at the Frechet mean of the real set.
CommandResult cmd_gscore(const RunConfig& cfg);
/// out_dir/augment_report.json and out_dir/augment_report.csv.
CommandResult cmd_augment_eval(const RunConfig& cfg);
/// synth-data (only when data.path is empty), train, generate, gscore and
/// augment-eval in that order.
CommandResult cmd_pipeline(const RunConfig& cfg);

}  // namespace spdgan
