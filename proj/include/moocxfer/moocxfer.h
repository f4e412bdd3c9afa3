// Copyright 2026 The moocxfer Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

/* C interface of the moocxfer library.
 *
 * Objects are opaque handles created by the *_new / *_load / *_generate /
 * *_run functions and released by the matching *_free. Every function
 * returns an mx_status; on failure mx_last_error() describes the cause (the
 * message is per thread and valid until the next failing call on it).
 * Strings returned through char** are owned by the caller and released with
 * mx_string_free.
 */
#ifndef MOOCXFER_MOOCXFER_H_
#define MOOCXFER_MOOCXFER_H_

#include <stdint.h>

#if defined(MX_BUILDING_LIBRARY)
#define MX_API __attribute__((visibility("default")))
#else
#define MX_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum {
  MX_OK = 0,
  MX_ERR_ARGUMENT = 1,
  MX_ERR_CONFIG = 2,
  MX_ERR_DATA = 3,
  MX_ERR_TRAINING = 4,
  MX_ERR_IO = 5,
  MX_ERR_INTERNAL = 6,
} mx_status;

typedef struct mx_config mx_config;
typedef struct mx_corpus mx_corpus;
typedef struct mx_model mx_model;
typedef struct mx_report mx_report;

typedef void (*mx_log_fn)(const char* message, void* user);

MX_API const char* mx_version(void);
MX_API const char* mx_last_error(void);
MX_API const char* mx_status_name(mx_status status);
/* Process exit code for a status: 0 ok, 2 config or argument, 3 data or I/O,
 * 4 training, 1 otherwise. */
MX_API int mx_exit_code(mx_status status);
MX_API void mx_string_free(char* s);

/* Configuration: "key = value" lines with JSON values. */
MX_API mx_status mx_config_new(mx_config** out);
MX_API mx_status mx_config_parse(const char* text, mx_config** out);
MX_API mx_status mx_config_load(const char* path, mx_config** out);
/* `value` is JSON; text that is not valid JSON is taken as a string. */
MX_API mx_status mx_config_set(mx_config* config, const char* key, const char* value);
MX_API mx_status mx_config_json(const mx_config* config, char** out);
MX_API mx_status mx_config_hash(const mx_config* config, char** out);
MX_API void mx_config_free(mx_config* config);

/* Corpora. `scenario` is "small", "medium" or a scenario JSON file; a
 * nonzero `override_seed` replaces the scenario's seed by `seed`. */
MX_API mx_status mx_corpus_generate(const char* scenario, int override_seed, uint64_t seed,
                                    mx_corpus** out);
MX_API mx_status mx_corpus_load(const char* dir, mx_corpus** out);
MX_API mx_status mx_corpus_save(const mx_corpus* corpus, const char* dir);
/* Ground truth of a generated corpus as JSON; MX_ERR_ARGUMENT for loaded
 * corpora. */
MX_API mx_status mx_corpus_truth(const mx_corpus* corpus, char** out);
/* Course ids, split membership, student and label counts as JSON. */
MX_API mx_status mx_corpus_summary(const mx_corpus* corpus, char** out);
MX_API void mx_corpus_free(mx_corpus* corpus);

/* Early-dropout filter of every course: per course the threshold, the
 * logistic weights and the kept / removed student ids, as JSON. */
MX_API mx_status mx_filter_run(const mx_corpus* corpus, const mx_config* config, char** out);

/* Writes <course>.csv (student, week, 45 features, normalised with the
 * training-course statistics) for every course plus features.json with
 * names, shapes and statistics. */
MX_API mx_status mx_features_write(const mx_corpus* corpus, const mx_config* config, double level,
                                   const char* dir);

/* Trains `arch` ("bo", "btm", "bsm") on the training courses. */
MX_API mx_status mx_train(const mx_corpus* corpus, const mx_config* config, const char* arch,
                          double level, mx_model** out);
MX_API mx_status mx_model_save(const mx_model* model, const char* path);
MX_API mx_status mx_model_load(const char* path, mx_model** out);
/* CSV "student_id,p_fail,predicted_label" for the course stored in
 * `course_dir`. Feature constants come from `config`, or the defaults when it
 * is null. */
MX_API mx_status mx_model_predict(const mx_model* model, const mx_config* config,
                                  const char* course_dir, char** out);
MX_API void mx_model_free(mx_model* model);

/* One setting ("OneOneSame", "NOneSame", "OneOneDiff", "NOneDiff",
 * "NCDiff", "NCDiffFT") for one architecture and level. */
MX_API mx_status mx_experiment_run(const mx_corpus* corpus, const mx_config* config,
                                   const char* setting, const char* arch, double level,
                                   mx_report** out);
/* Meta-slice ablation at `level`; the report holds ablation rows only. */
MX_API mx_status mx_ablation_run(const mx_corpus* corpus, const mx_config* config, double level,
                                 mx_report** out);
/* Attention quartiles of a BSM model over the transfer courses. */
MX_API mx_status mx_attention_run(const mx_corpus* corpus, const mx_config* config,
                                  const mx_model* model, mx_report** out);

MX_API mx_status mx_report_load(const char* path, mx_report** out);
/* Appends the rows of `src` to `dst`. */
MX_API mx_status mx_report_merge(mx_report* dst, const mx_report* src);
MX_API mx_status mx_report_json(const mx_report* report, char** out);
MX_API mx_status mx_report_table_csv(const mx_report* report, char** out);
MX_API mx_status mx_report_attention_csv(const mx_report* report, char** out);
MX_API mx_status mx_report_ablation_csv(const mx_report* report, char** out);
MX_API void mx_report_free(mx_report* report);

/* ingest -> filter -> features -> train -> evaluate under the config's
 * work_dir. `out` (optional) receives {"stages": [...], "report": path}. */
MX_API mx_status mx_pipeline_run(const mx_config* config, mx_log_fn log, void* user, char** out);

#ifdef __cplusplus
}  /* extern "C" */
#endif

#endif  /* MOOCXFER_MOOCXFER_H_ */
