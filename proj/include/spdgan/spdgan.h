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

/* C interface to libspdgan. Every function returns a status code; on failure
 * spdgan_last_error() describes the most recent error on the calling thread.
 * Handles are opaque and owned by the caller until passed to the matching
 * *_free function. Matrices are dense n*n arrays in row-major order. */

#ifndef SPDGAN_SPDGAN_H_
#define SPDGAN_SPDGAN_H_

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define SPDGAN_API __declspec(dllexport)
#else
#define SPDGAN_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

/* Values 1-3 double as process exit codes. */
typedef enum spdgan_status {
  SPDGAN_OK = 0,
  SPDGAN_ERR_CONFIG = 1,
  SPDGAN_ERR_DATA = 2,
  SPDGAN_ERR_NUMERICAL = 3,
  SPDGAN_ERR_INVALID_ARGUMENT = 4,
  SPDGAN_ERR_INTERNAL = 5
} spdgan_status;

typedef struct spdgan_config spdgan_config;
typedef struct spdgan_dataset spdgan_dataset;
typedef struct spdgan_model spdgan_model;

/* Called once per training step with one JSON log line (no newline). */
typedef void (*spdgan_record_fn)(const char* json_line, void* user);

SPDGAN_API const char* spdgan_version(void);
/* Empty string when no error has occurred on this thread. */
SPDGAN_API const char* spdgan_last_error(void);
SPDGAN_API void spdgan_string_free(char* s);

SPDGAN_API spdgan_status spdgan_config_default(spdgan_config** out);
SPDGAN_API spdgan_status spdgan_config_load(const char* path, spdgan_config** out);
SPDGAN_API spdgan_status spdgan_config_parse(const char* json, spdgan_config** out);
/* `json_value` is a JSON literal, e.g. "3", "\"geodesic\"" or "[0, 1]".
 * The config is left unchanged if the result fails validation. */
SPDGAN_API spdgan_status spdgan_config_set(spdgan_config* cfg, const char* key, const char* json_value);
/* Resolved config as JSON; release with spdgan_string_free. */
SPDGAN_API spdgan_status spdgan_config_to_json(const spdgan_config* cfg, char** out);
SPDGAN_API void spdgan_config_free(spdgan_config* cfg);

SPDGAN_API spdgan_status spdgan_cmd_synth_data(const spdgan_config* cfg);
SPDGAN_API spdgan_status spdgan_cmd_train(const spdgan_config* cfg, spdgan_record_fn on_record, void* user);
SPDGAN_API spdgan_status spdgan_cmd_generate(const spdgan_config* cfg);
SPDGAN_API spdgan_status spdgan_cmd_gscore(const spdgan_config* cfg);
SPDGAN_API spdgan_status spdgan_cmd_augment_eval(const spdgan_config* cfg);
SPDGAN_API spdgan_status spdgan_cmd_pipeline(const spdgan_config* cfg);

SPDGAN_API spdgan_status spdgan_dataset_load(const char* path, spdgan_dataset** out);
SPDGAN_API spdgan_status spdgan_dataset_save(const spdgan_dataset* ds, const char* path);
SPDGAN_API void spdgan_dataset_free(spdgan_dataset* ds);
SPDGAN_API spdgan_status spdgan_dataset_size(const spdgan_dataset* ds, size_t* out);
SPDGAN_API spdgan_status spdgan_dataset_dim(const spdgan_dataset* ds, int* out);
/* Copies n*n values into `out`. */
SPDGAN_API spdgan_status spdgan_dataset_matrix(const spdgan_dataset* ds, size_t index, double* out);
SPDGAN_API spdgan_status spdgan_dataset_label(const spdgan_dataset* ds, size_t index, int* out);
SPDGAN_API spdgan_status spdgan_dataset_synthetic(const spdgan_dataset* ds, size_t index, int* out);

SPDGAN_API spdgan_status spdgan_model_load(const char* path, spdgan_model** out);
SPDGAN_API void spdgan_model_free(spdgan_model* model);
SPDGAN_API spdgan_status spdgan_model_dim(const spdgan_model* model, int* out);
SPDGAN_API spdgan_status spdgan_model_num_classes(const spdgan_model* model, int* out);
/* counts[c] samples of class c for c < num_counts; num_counts must equal the
 * model's class count. */
SPDGAN_API spdgan_status spdgan_model_generate(const spdgan_model* model, const int* counts, size_t num_counts,
                                               uint64_t seed, spdgan_dataset** out);

/* Affine-invariant distance between two n x n SPD matrices. */
SPDGAN_API spdgan_status spdgan_geodesic_distance(const double* x, const double* z, int n, double* out);

#ifdef __cplusplus
}
#endif

#endif /* SPDGAN_SPDGAN_H_ */
