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

#include "spdgan/commands.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>

#include "json.hpp"
#include "json_util.hpp"
#include "spdgan/augment.hpp"
#include "spdgan/data.hpp"
#include "spdgan/gan.hpp"
#include "spdgan/gscore.hpp"
#include "spdgan/random.hpp"

namespace spdgan {

namespace {

using nlohmann::ordered_json;

std::string utc_now() {
  auto now = std::chrono::system_clock::now();
  std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string out_file(const RunConfig& cfg, const std::string& name) {
  return (std::filesystem::path(cfg.out_dir) / name).string();
}

// Creates out_dir, writes the config echo, and stamps metadata on success.
class Stage {
 public:
  Stage(const RunConfig& cfg, std::string name) : cfg_(cfg), name_(std::move(name)), started_(utc_now()) {
    cfg.validate();
    std::error_code ec;
    std::filesystem::create_directories(cfg.out_dir, ec);
    if (ec) throw DataError("cannot create output directory '" + cfg.out_dir + "': " + ec.message());
    write_text_file(out_file(cfg, "config.resolved.json"), config_to_json(cfg));
  }

  void finish(const CommandResult& result) const {
    ordered_json meta;
    meta["command"] = name_;
    meta["started"] = started_;
    meta["finished"] = utc_now();
    meta["outputs"] = result.outputs;
    write_text_file(out_file(cfg_, "metadata_" + name_ + ".json"), meta.dump(2) + "\n");
  }

 private:
  const RunConfig& cfg_;
  std::string name_;
  std::string started_;
};

ordered_json mrlt_json(const std::vector<double>& v) {
  ordered_json a = ordered_json::array();
  for (double x : v) a.push_back(x);
  return a;
}

struct ScoreRow {
  std::string group;
  std::vector<double> real, gen;
  double score = 0.0;
};

ScoreRow score_clouds(const std::string& group, const PointCloud& real, const PointCloud& gen,
                      const GscoreParams& params) {
  real.validate();
  gen.validate();
  GscoreParams p = params;
  p.witness.landmarks = std::min({p.witness.landmarks, real.size(), gen.size()});
  ScoreRow row;
  row.group = group;
  row.real = mrlt(real, p);
  row.gen = mrlt(gen, p);
  row.score = geometry_score(row.real, row.gen);
  return row;
}

PointCloud rows_of(const PointCloud& all, const std::vector<int>& idx) {
  PointCloud c;
  c.points.resize(static_cast<Eigen::Index>(idx.size()), all.points.cols());
  for (size_t i = 0; i < idx.size(); ++i) c.points.row(static_cast<Eigen::Index>(i)) = all.points.row(idx[i]);
  return c;
}

}  // namespace

CommandResult cmd_synth_data(const RunConfig& cfg) {
  Stage stage(cfg, "synth-data");
  SynthOptions opts = cfg.synth;
  opts.seed = cfg.seed;
  SynthBenchmark bench = synth_benchmark(opts);

  CommandResult r;
  r.outputs.push_back(out_file(cfg, "dataset.json"));
  write_dataset(r.outputs.back(), bench.dataset);

  ordered_json centers;
  centers["n"] = opts.n;
  centers["centers"] = ordered_json::array();
  for (size_t c = 0; c < bench.centers.size(); ++c) {
    ordered_json e;
    e["label"] = static_cast<int>(c);
    e["matrix"] = ordered_json::parse(detail::matrix_to_json(bench.centers[c].matrix()).dump());
    centers["centers"].push_back(e);
  }
  r.outputs.push_back(out_file(cfg, "centers.json"));
  write_text_file(r.outputs.back(), centers.dump(2) + "\n");
  stage.finish(r);
  return r;
}

CommandResult cmd_train(const RunConfig& cfg, const std::function<void(const TrainRecord&)>& on_record) {
  Stage stage(cfg, "train");
  LabeledSpdDataset data = read_dataset(cfg.resolved_data_path());

  CommandResult r;
  const std::string log_path = out_file(cfg, "train_log.jsonl");
  std::ofstream log(log_path, std::ios::binary | std::ios::trunc);
  if (!log) throw DataError("cannot open '" + log_path + "' for writing");

  TrainConfig tc = cfg.train;
  tc.seed = cfg.seed;
  TrainResult res = train(data, tc, cfg.weights, [&](const TrainRecord& rec) {
    log << to_json_line(rec) << '\n';
    if (on_record) on_record(rec);
  });
  log.close();
  if (!log) throw DataError("write to '" + log_path + "' failed");

  r.outputs.push_back(cfg.resolved_checkpoint_path());
  write_model(r.outputs.back(), res.model);
  r.outputs.push_back(log_path);
  stage.finish(r);
  return r;
}

CommandResult cmd_generate(const RunConfig& cfg) {
  Stage stage(cfg, "generate");
  GanModel model = read_model(cfg.resolved_checkpoint_path());
  if (static_cast<int>(cfg.generate_counts.size()) != model.num_classes)
    throw ConfigError("config key 'generate.counts': " + std::to_string(cfg.generate_counts.size()) +
                      " counts for a model with " + std::to_string(model.num_classes) + " classes");
  LabeledSpdDataset gen = generate_dataset(model, cfg.generate_counts, derive_seed(cfg.seed, 1));

  CommandResult r;
  r.outputs.push_back(out_file(cfg, "synthetic.json"));
  write_dataset(r.outputs.back(), gen);
  stage.finish(r);
  return r;
}

CommandResult cmd_gscore(const RunConfig& cfg) {
  Stage stage(cfg, "gscore");
  LabeledSpdDataset real = read_dataset(cfg.resolved_real_path());
  LabeledSpdDataset gen = read_dataset(cfg.resolved_generated_path());
  real.validate();
  gen.validate();
  if (real.empty()) throw DataError(cfg.resolved_real_path() + ": dataset is empty");
  if (gen.n != real.n && !gen.empty())
    throw DimensionError("gscore: real samples are " + std::to_string(real.n) + "x" + std::to_string(real.n) +
                         ", generated are " + std::to_string(gen.n) + "x" + std::to_string(gen.n));

  GscoreParams params = cfg.gscore;
  params.seed = cfg.seed;
  const ManifoldContext ctx(frechet_mean(real.matrices()));
  const PointCloud real_cloud = spd_cloud(real.matrices(), ctx);
  const PointCloud gen_cloud = spd_cloud(gen.matrices(), ctx);

  std::vector<ScoreRow> rows;
  rows.push_back(score_clouds("all", real_cloud, gen_cloud, params));
  ordered_json per_class = ordered_json::array();
  const int classes = std::max(real.num_classes(), gen.num_classes());
  for (int c = 0; c < classes; ++c) {
    ordered_json e;
    e["label"] = c;
    auto ri = real.indices_of(c);
    auto gi = gen.indices_of(c);
    if (ri.size() < 4 || gi.size() < 4) {
      // too few points for a landmark complex
      e["mrlt_real"] = nullptr;
      e["mrlt_gen"] = nullptr;
      e["geometry_score"] = nullptr;
    } else {
      rows.push_back(score_clouds(std::to_string(c), rows_of(real_cloud, ri), rows_of(gen_cloud, gi), params));
      e["mrlt_real"] = mrlt_json(rows.back().real);
      e["mrlt_gen"] = mrlt_json(rows.back().gen);
      e["geometry_score"] = rows.back().score;
    }
    per_class.push_back(e);
  }

  ordered_json report;
  report["real"] = cfg.resolved_real_path();
  report["generated"] = cfg.resolved_generated_path();
  report["mrlt_real"] = mrlt_json(rows[0].real);
  report["mrlt_gen"] = mrlt_json(rows[0].gen);
  report["geometry_score"] = rows[0].score;
  report["per_class"] = per_class;

  CommandResult r;
  r.outputs.push_back(out_file(cfg, "gscore.json"));
  write_text_file(r.outputs.back(), report.dump(2) + "\n");

  std::string csv = "group,source,i,mrlt\n";
  char buf[96];
  for (const auto& row : rows) {
    for (int src = 0; src < 2; ++src) {
      const auto& v = src == 0 ? row.real : row.gen;
      for (size_t i = 0; i < v.size(); ++i) {
        std::snprintf(buf, sizeof buf, ",%s,%zu,%.9g\n", src == 0 ? "real" : "generated", i, v[i]);
        csv += row.group + buf;
      }
    }
  }
  r.outputs.push_back(out_file(cfg, "mrlt.csv"));
  write_text_file(r.outputs.back(), csv);
  stage.finish(r);
  return r;
}

CommandResult cmd_augment_eval(const RunConfig& cfg) {
  Stage stage(cfg, "augment-eval");
  LabeledSpdDataset data = read_dataset(cfg.resolved_data_path());
  EvalReport report = augmentation_experiment(data, cfg.augment_config());

  CommandResult r;
  r.outputs.push_back(out_file(cfg, "augment_report.json"));
  write_text_file(r.outputs.back(), report_to_json(report));
  r.outputs.push_back(out_file(cfg, "augment_report.csv"));
  write_text_file(r.outputs.back(), report_to_csv(report));
  stage.finish(r);
  return r;
}

CommandResult cmd_pipeline(const RunConfig& cfg) {
  Stage stage(cfg, "pipeline");
  CommandResult r;
  auto take = [&](const CommandResult& part) {
    r.outputs.insert(r.outputs.end(), part.outputs.begin(), part.outputs.end());
  };
  if (cfg.data_path.empty()) take(cmd_synth_data(cfg));
  take(cmd_train(cfg));
  take(cmd_generate(cfg));
  take(cmd_gscore(cfg));
  take(cmd_augment_eval(cfg));
  stage.finish(r);
  return r;
}

}  // namespace spdgan
