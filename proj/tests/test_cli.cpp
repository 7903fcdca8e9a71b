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
#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "temp_dir.hpp"

namespace {

// Runs the CLI with `args`, output discarded. Returns the exit status.
int run(const std::string& args) {
  std::string cmd = std::string(SPDGAN_CLI) + " " + args + " >/dev/null 2>&1";
  int status = std::system(cmd.c_str());
  REQUIRE(WIFEXITED(status));
  return WEXITSTATUS(status);
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write(const std::string& path, const std::string& text) { std::ofstream(path) << text; }

const char* kTiny = R"({"data.n": 3, "data.per_class": [10, 10], "train.epochs": 1, "train.batch_size": 8,
  "train.critic_iters": 1, "gen.noise_dim": 4, "gen.hidden": [8], "critic.hidden": [8],
  "generate.counts": [6, 6], "gscore.runs": 2, "gscore.landmarks": 6, "augment.folds": 2,
  "augment.multipliers": [0, 1], "classifier.steps": 20})";

}  // namespace

TEST_CASE("help and usage errors") {
  CHECK(run("--help") == 0);
  CHECK(run("--version") == 0);
  CHECK(run("") != 0);
  CHECK(run("frobnicate") == 1);
  CHECK(run("train --seed abc") == 1);
}

TEST_CASE("exit codes") {
  testutil::TempDir dir("cli");
  write(dir.file("tiny.json"), kTiny);
  write(dir.file("bad.json"), R"({"train.epochs": -1})");
  write(dir.file("unknown.json"), R"({"train.epoch": 1})");
  const std::string out = " --out " + dir.file("o");

  CHECK(run("train --config " + dir.file("bad.json") + out) == 1);
  CHECK(run("train --config " + dir.file("unknown.json") + out) == 1);
  CHECK(run("train --set train.epochs=x" + out) == 1);
  CHECK(run("train --config " + dir.file("tiny.json") + out) == 2);  // no dataset yet
  CHECK(run("gscore --config " + dir.file("tiny.json") + out + " --real " + dir.file("nope.json")) == 2);

  // a huge learning rate blows the critic up
  CHECK(run("synth-data --config " + dir.file("tiny.json") + out) == 0);
  CHECK(run("train --config " + dir.file("tiny.json") + out +
            " --set train.learning_rate=1e12 --set train.epochs=20 --set loss.lambda=0") == 3);
}

TEST_CASE("stages chain through files and honour overrides") {
  testutil::TempDir dir("cli");
  write(dir.file("tiny.json"), kTiny);
  const std::string base = " --config " + dir.file("tiny.json") + " --seed 4 --out " + dir.file("o");

  REQUIRE(run("synth-data" + base) == 0);
  REQUIRE(run("train" + base + " --checkpoint " + dir.file("model.json")) == 0);
  REQUIRE(run("generate" + base + " --checkpoint " + dir.file("model.json") + " --counts 3,4") == 0);
  auto resolved = slurp(dir.file("o/config.resolved.json"));
  CHECK(resolved.find("\"seed\": 4") != std::string::npos);
  CHECK(resolved.find("\"generate.counts\": [\n    3,\n    4\n  ]") != std::string::npos);
  REQUIRE(run("gscore" + base) == 0);
  REQUIRE(run("augment-eval" + base) == 0);

  CHECK(std::filesystem::exists(dir.file("o/gscore.json")));
  CHECK(std::filesystem::exists(dir.file("o/augment_report.csv")));

  // same seed, same bytes
  const auto report = slurp(dir.file("o/augment_report.json"));
  const auto log = slurp(dir.file("o/train_log.jsonl"));
  REQUIRE(run("train" + base + " --checkpoint " + dir.file("model.json")) == 0);
  REQUIRE(run("augment-eval" + base) == 0);
  CHECK(slurp(dir.file("o/augment_report.json")) == report);
  CHECK(slurp(dir.file("o/train_log.jsonl")) == log);
}

TEST_CASE("pipeline") {
  testutil::TempDir dir("cli");
  write(dir.file("tiny.json"), kTiny);
  CHECK(run("pipeline --config " + dir.file("tiny.json") + " --out " + dir.file("p")) == 0);
  for (auto f : {"dataset.json", "checkpoint.json", "synthetic.json", "gscore.json", "augment_report.csv",
                 "metadata_pipeline.json"})
    CHECK(std::filesystem::exists(dir.file(std::string("p/") + f)));
}
