// Copyright 2026 The OLSR Authors. All Rights Reserved.
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

/*
 * C interface to the olsr out-of-distribution detector.
 *
 * Every fallible call returns an olsr_status. On failure the message for the
 * calling thread is available from olsr_last_error() until the next failing
 * call. Objects are opaque handles released with their *_free function;
 * strings returned through char** are released with olsr_string_free().
 */
#ifndef OLSR_OLSR_H_
#define OLSR_OLSR_H_

#include <stddef.h>
#include <stdint.h>

#if defined(OLSR_BUILDING_LIBRARY)
#define OLSR_API __attribute__((visibility("default")))
#else
#define OLSR_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum olsr_status {
  OLSR_OK = 0,
  OLSR_ERR_SHAPE = 1,
  OLSR_ERR_PARAMETER = 2,
  OLSR_ERR_NUMERIC = 3,
  OLSR_ERR_IO = 4,
  OLSR_ERR_FORMAT = 5,
  OLSR_ERR_DIMENSION = 6,
  OLSR_ERR_CALIBRATION = 7,
  OLSR_ERR_SCORING = 8,
  OLSR_ERR_EVALUATION = 9,
  OLSR_ERR_UNSUPPORTED = 10,
  OLSR_ERR_CONFIG = 11,
  OLSR_ERR_INVALID_ARGUMENT = 98, /* null handle or pointer */
  OLSR_ERR_INTERNAL = 99
} olsr_status;

typedef enum olsr_ood_kind {
  OLSR_OOD_SHIFTED = 0,
  OLSR_OOD_SCALED_NORM = 1,
  OLSR_OOD_UNIFORM = 2
} olsr_ood_kind;

typedef enum olsr_framework { OLSR_FRAMEWORK_LAYERWISE = 0, OLSR_FRAMEWORK_BASIC = 1 } olsr_framework;
typedef enum olsr_distance { OLSR_DISTANCE_NL2 = 0, OLSR_DISTANCE_L2 = 1 } olsr_distance;
typedef enum olsr_loss { OLSR_LOSS_NORM = 0, OLSR_LOSS_SQUARED = 1 } olsr_loss;

typedef struct olsr_features olsr_features;
typedef struct olsr_model olsr_model;

OLSR_API const char* olsr_version(void);
OLSR_API const char* olsr_last_error(void);
OLSR_API const char* olsr_status_name(olsr_status status);
OLSR_API void olsr_string_free(char* s);

/* ---- feature sets (AVF1) ---- */

OLSR_API olsr_status olsr_features_read(const char* path, olsr_features** out);
/* CSV with header label,f0,...; classes = 0 infers C from the labels. */
OLSR_API olsr_status olsr_features_read_csv(const char* path, uint32_t classes, olsr_features** out);
OLSR_API olsr_status olsr_features_write(const olsr_features* set, const char* path);
/* Copies n*h floats and n labels (-1 = unlabeled). */
OLSR_API olsr_status olsr_features_create(uint64_t n, uint32_t h, uint32_t c, const float* data,
                                          const int32_t* labels, olsr_features** out);
OLSR_API void olsr_features_free(olsr_features* set);
OLSR_API uint64_t olsr_features_count(const olsr_features* set);
OLSR_API uint32_t olsr_features_dim(const olsr_features* set);
OLSR_API uint32_t olsr_features_classes(const olsr_features* set);
/* Pointer to the row-major N x H payload, valid while the handle lives. */
OLSR_API const float* olsr_features_data(const olsr_features* set);
OLSR_API const int32_t* olsr_features_labels(const olsr_features* set);
OLSR_API olsr_status olsr_features_split(const olsr_features* set, double val_fraction, uint64_t seed,
                                         olsr_features** train, olsr_features** val);

/* ---- synthetic features ---- */

typedef struct olsr_synth_spec {
  uint32_t classes;
  uint32_t dim;
  double mean_scale;
  double within_sigma;
  olsr_ood_kind ood_kind;
  double ood_norm_multiplier;
  double shift;
  uint64_t seed;
} olsr_synth_spec;

OLSR_API void olsr_synth_spec_default(olsr_synth_spec* spec);
OLSR_API olsr_status olsr_synth_id(const olsr_synth_spec* spec, uint64_t n, uint64_t stream,
                                   olsr_features** out);
OLSR_API olsr_status olsr_synth_ood(const olsr_synth_spec* spec, uint64_t n, uint64_t stream,
                                    olsr_features** out);

/* ---- training and calibration ---- */

typedef struct olsr_train_config {
  double lambda;
  double temperature;
  double lr;
  uint64_t batch;
  uint64_t epochs;
  uint64_t seed;
  uint64_t hidden; /* 0 = max(H, 4C) */
  olsr_loss loss;
  double epsilon_k[3];
  double val_fraction;
  olsr_framework framework;
  olsr_distance distance;
  int detach_l2_target;
  double target_tpr;
} olsr_train_config;

OLSR_API void olsr_train_config_default(olsr_train_config* config);

/*
 * Trains on `train` and calibrates on `val`. When `val` is NULL a stratified
 * split of `train` (config->val_fraction, config->seed) is used instead.
 * `init_encoder` is an optional row-major C x H matrix. When `log_json` is
 * non-NULL it receives the training log.
 */
OLSR_API olsr_status olsr_train(const olsr_features* train, const olsr_features* val,
                                const olsr_train_config* config, const double* init_encoder,
                                olsr_model** out, char** log_json);

OLSR_API olsr_status olsr_model_save(const olsr_model* model, const char* path);
OLSR_API olsr_status olsr_model_load(const char* path, olsr_model** out);
OLSR_API void olsr_model_free(olsr_model* model);
OLSR_API uint32_t olsr_model_dim(const olsr_model* model);
OLSR_API uint32_t olsr_model_classes(const olsr_model* model);
/* Architecture and calibration summary. */
OLSR_API olsr_status olsr_model_info_json(const olsr_model* model, char** json);

/* ---- scoring ---- */

typedef struct olsr_score_row {
  double conf;
  double r1;
  double r2;
  double phi0;
  double psi1;
  double psi2;
  double score;
  uint32_t predicted;
  int flagged; /* degenerate input, scored 0 */
  int is_ood;  /* score below the stored validation threshold */
} olsr_score_row;

/* Scores every row of `set` into rows[0..n). `capacity` must be >= n. */
OLSR_API olsr_status olsr_score(const olsr_model* model, const olsr_features* set, int use_epsilon,
                                olsr_score_row* rows, size_t capacity);
OLSR_API olsr_status olsr_score_vector(const olsr_model* model, const double* v, size_t len,
                                       int use_epsilon, olsr_score_row* row);
OLSR_API olsr_status olsr_threshold_from_validation(const double* scores, size_t n, double target_tpr,
                                                    double* threshold);

/* ---- metrics ---- */

typedef struct olsr_eval_report {
  double fpr_at_95tpr;
  double auroc;
  double aupr_in;
  double detection_error;
  uint64_t id_count;
  uint64_t ood_count;
} olsr_eval_report;

/* Fractions in [0, 1]. */
OLSR_API olsr_status olsr_evaluate(const double* id_scores, size_t n, const double* ood_scores,
                                   size_t m, olsr_eval_report* report);
OLSR_API olsr_status olsr_histogram(const double* scores, size_t n, size_t bins, uint64_t* counts);

/* ---- piecewise-affine verification ---- */

/*
 * Checks the v -> D1(Wv) path of a layerwise model on every row of `inputs`
 * and tabulates the norm-bias demo over `norm_grid` (directions = inputs).
 */
OLSR_API olsr_status olsr_verify_affine_model(const olsr_model* model, const olsr_features* inputs,
                                              const double* norm_grid, size_t grid_len, int frobenius,
                                              char** report_json);
/* Random ReLU network with layer widths[0..count) and `samples` random inputs. */
OLSR_API olsr_status olsr_verify_affine_random(const uint32_t* widths, size_t count, uint64_t seed,
                                               uint64_t samples, int frobenius, char** report_json);

#ifdef __cplusplus
}
#endif

#endif /* OLSR_OLSR_H_ */
