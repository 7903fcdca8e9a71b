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

#include "spdgan/spdgan.h"

#include <cstring>
#include <new>
#include <string>

#include "spdgan/commands.hpp"
#include "spdgan/config.hpp"
#include "spdgan/data.hpp"
#include "spdgan/gan.hpp"
#include "spdgan/spd.hpp"

struct spdgan_config {
  spdgan::RunConfig cfg;
};

struct spdgan_dataset {
  spdgan::LabeledSpdDataset data;
};

struct spdgan_model {
  spdgan::GanModel model;
};

namespace {

thread_local std::string last_error;

spdgan_status fail(spdgan_status code, const std::string& what) {
  last_error = what;
  return code;
}

template <class F>
spdgan_status guarded(F&& body) {
  try {
    body();
    last_error.clear();
    return SPDGAN_OK;
  } catch (const spdgan::Error& e) {
    return fail(static_cast<spdgan_status>(static_cast<int>(e.code())), e.what());
  } catch (const std::bad_alloc&) {
    return fail(SPDGAN_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(SPDGAN_ERR_INTERNAL, e.what());
  } catch (...) {
    return fail(SPDGAN_ERR_INTERNAL, "unknown error");
  }
}

#define REQUIRE(ptr)                                                        \
  do {                                                                      \
    if (!(ptr)) return fail(SPDGAN_ERR_INVALID_ARGUMENT, #ptr " is null"); \
  } while (0)

const spdgan::LabeledSample* sample_at(const spdgan_dataset* ds, size_t index) {
  if (index >= ds->data.size())
    throw spdgan::DimensionError("sample index " + std::to_string(index) + " out of range (size " +
                                 std::to_string(ds->data.size()) + ")");
  return &ds->data.samples[index];
}

char* dup_string(const std::string& s) {
  char* out = new char[s.size() + 1];
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

}  // namespace

extern "C" {

const char* spdgan_version(void) { return "1.0.0"; }

const char* spdgan_last_error(void) { return last_error.c_str(); }

void spdgan_string_free(char* s) { delete[] s; }

spdgan_status spdgan_config_default(spdgan_config** out) {
  REQUIRE(out);
  return guarded([&] { *out = new spdgan_config{}; });
}

spdgan_status spdgan_config_load(const char* path, spdgan_config** out) {
  REQUIRE(path);
  REQUIRE(out);
  return guarded([&] { *out = new spdgan_config{spdgan::load_config(path)}; });
}

spdgan_status spdgan_config_parse(const char* json, spdgan_config** out) {
  REQUIRE(json);
  REQUIRE(out);
  return guarded([&] { *out = new spdgan_config{spdgan::parse_config(json)}; });
}

spdgan_status spdgan_config_set(spdgan_config* cfg, const char* key, const char* json_value) {
  REQUIRE(cfg);
  REQUIRE(key);
  REQUIRE(json_value);
  return guarded([&] {
    spdgan::RunConfig next = cfg->cfg;
    spdgan::set_config_value(next, key, json_value);
    next.validate();
    cfg->cfg = std::move(next);
  });
}

spdgan_status spdgan_config_to_json(const spdgan_config* cfg, char** out) {
  REQUIRE(cfg);
  REQUIRE(out);
  return guarded([&] { *out = dup_string(spdgan::config_to_json(cfg->cfg)); });
}

void spdgan_config_free(spdgan_config* cfg) { delete cfg; }

spdgan_status spdgan_cmd_synth_data(const spdgan_config* cfg) {
  REQUIRE(cfg);
  return guarded([&] { spdgan::cmd_synth_data(cfg->cfg); });
}

spdgan_status spdgan_cmd_train(const spdgan_config* cfg, spdgan_record_fn on_record, void* user) {
  REQUIRE(cfg);
  return guarded([&] {
    std::function<void(const spdgan::TrainRecord&)> cb;
    if (on_record)
      cb = [&](const spdgan::TrainRecord& rec) { on_record(spdgan::to_json_line(rec).c_str(), user); };
    spdgan::cmd_train(cfg->cfg, cb);
  });
}

spdgan_status spdgan_cmd_generate(const spdgan_config* cfg) {
  REQUIRE(cfg);
  return guarded([&] { spdgan::cmd_generate(cfg->cfg); });
}

spdgan_status spdgan_cmd_gscore(const spdgan_config* cfg) {
  REQUIRE(cfg);
  return guarded([&] { spdgan::cmd_gscore(cfg->cfg); });
}

spdgan_status spdgan_cmd_augment_eval(const spdgan_config* cfg) {
  REQUIRE(cfg);
  return guarded([&] { spdgan::cmd_augment_eval(cfg->cfg); });
}

spdgan_status spdgan_cmd_pipeline(const spdgan_config* cfg) {
  REQUIRE(cfg);
  return guarded([&] { spdgan::cmd_pipeline(cfg->cfg); });
}

spdgan_status spdgan_dataset_load(const char* path, spdgan_dataset** out) {
  REQUIRE(path);
  REQUIRE(out);
  return guarded([&] {
    auto ds = spdgan::read_dataset(path);
    ds.validate();
    *out = new spdgan_dataset{std::move(ds)};
  });
}

spdgan_status spdgan_dataset_save(const spdgan_dataset* ds, const char* path) {
  REQUIRE(ds);
  REQUIRE(path);
  return guarded([&] { spdgan::write_dataset(path, ds->data); });
}

void spdgan_dataset_free(spdgan_dataset* ds) { delete ds; }

spdgan_status spdgan_dataset_size(const spdgan_dataset* ds, size_t* out) {
  REQUIRE(ds);
  REQUIRE(out);
  *out = ds->data.size();
  return SPDGAN_OK;
}

spdgan_status spdgan_dataset_dim(const spdgan_dataset* ds, int* out) {
  REQUIRE(ds);
  REQUIRE(out);
  *out = ds->data.n;
  return SPDGAN_OK;
}

spdgan_status spdgan_dataset_matrix(const spdgan_dataset* ds, size_t index, double* out) {
  REQUIRE(ds);
  REQUIRE(out);
  return guarded([&] {
    const auto& m = sample_at(ds, index)->matrix.matrix();
    const int n = ds->data.n;
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) out[i * n + j] = m(i, j);
  });
}

spdgan_status spdgan_dataset_label(const spdgan_dataset* ds, size_t index, int* out) {
  REQUIRE(ds);
  REQUIRE(out);
  return guarded([&] { *out = sample_at(ds, index)->label; });
}

spdgan_status spdgan_dataset_synthetic(const spdgan_dataset* ds, size_t index, int* out) {
  REQUIRE(ds);
  REQUIRE(out);
  return guarded([&] { *out = sample_at(ds, index)->synthetic ? 1 : 0; });
}

spdgan_status spdgan_model_load(const char* path, spdgan_model** out) {
  REQUIRE(path);
  REQUIRE(out);
  return guarded([&] { *out = new spdgan_model{spdgan::read_model(path)}; });
}

void spdgan_model_free(spdgan_model* model) { delete model; }

spdgan_status spdgan_model_dim(const spdgan_model* model, int* out) {
  REQUIRE(model);
  REQUIRE(out);
  *out = model->model.n;
  return SPDGAN_OK;
}

spdgan_status spdgan_model_num_classes(const spdgan_model* model, int* out) {
  REQUIRE(model);
  REQUIRE(out);
  *out = model->model.num_classes;
  return SPDGAN_OK;
}

spdgan_status spdgan_model_generate(const spdgan_model* model, const int* counts, size_t num_counts,
                                    uint64_t seed, spdgan_dataset** out) {
  REQUIRE(model);
  REQUIRE(out);
  if (num_counts > 0) REQUIRE(counts);
  return guarded([&] {
    if (num_counts != static_cast<size_t>(model->model.num_classes))
      throw spdgan::DimensionError("expected " + std::to_string(model->model.num_classes) + " counts, got " +
                                   std::to_string(num_counts));
    std::vector<int> c(counts, counts + num_counts);
    *out = new spdgan_dataset{spdgan::generate_dataset(model->model, c, seed)};
  });
}

spdgan_status spdgan_geodesic_distance(const double* x, const double* z, int n, double* out) {
  REQUIRE(x);
  REQUIRE(z);
  REQUIRE(out);
  if (n < 1) return fail(SPDGAN_ERR_INVALID_ARGUMENT, "n must be >= 1");
  return guarded([&] {
    using RowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
    spdgan::Matrix mx = Eigen::Map<const RowMajor>(x, n, n);
    spdgan::Matrix mz = Eigen::Map<const RowMajor>(z, n, n);
    if ((mx - mx.transpose()).cwiseAbs().maxCoeff() > 1e-10 * (1 + mx.cwiseAbs().maxCoeff()) ||
        (mz - mz.transpose()).cwiseAbs().maxCoeff() > 1e-10 * (1 + mz.cwiseAbs().maxCoeff()))
      throw spdgan::DataError("input is not symmetric");
    *out = spdgan::geodesic_dist(spdgan::SpdMatrix(mx), spdgan::SpdMatrix(mz));
  });
}

}  // extern "C"
