/* Copyright 2026 The DP-ULR Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

/* C interface to libdpulr.
 *
 * Every fallible call returns a dpulr_status. On failure, dpulr_last_error()
 * returns a message for the calling thread until its next failing call.
 * Handles are opaque; each _create has a matching _destroy that accepts NULL.
 */

#ifndef DPULR_DPULR_H_
#define DPULR_DPULR_H_

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define DPULR_API __declspec(dllexport)
#else
#define DPULR_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum dpulr_status {
  DPULR_OK = 0,
  DPULR_ERR_DIMENSION = 1,
  DPULR_ERR_NUMERIC = 2,
  DPULR_ERR_DOMAIN = 3,
  DPULR_ERR_CONFIG = 4,
  DPULR_ERR_FORMAT = 5,
  DPULR_ERR_VALIDITY = 6,
  DPULR_ERR_IO = 7,
  DPULR_ERR_INDEX = 8,
  DPULR_ERR_NULL = 9,
  DPULR_ERR_INTERNAL = 10
} dpulr_status;

DPULR_API const char* dpulr_version(void);
DPULR_API const char* dpulr_status_string(dpulr_status status);
DPULR_API const char* dpulr_last_error(void);

/* ---- accountant ---- */

typedef struct dpulr_srgm_params {
  double q;
  double sigma0;
  uint64_t n_b;
  uint64_t n_bar;
} dpulr_srgm_params;

typedef struct dpulr_epsilon_result {
  double epsilon;
  double alpha;
  double gamma;           /* composed over all steps at alpha */
  double impairment_term; /* per step */
  double main_term;       /* per step at alpha */
  int regime_valid;
} dpulr_epsilon_result;

/* Best epsilon over the default alpha grid. impairment_free selects the
 * plain subsampled Gaussian mechanism (no rejection term). */
DPULR_API dpulr_status dpulr_best_epsilon(const dpulr_srgm_params* params,
                                          uint64_t steps, double delta,
                                          int strict, int impairment_free,
                                          dpulr_epsilon_result* out);

DPULR_API dpulr_status dpulr_srgm_step_rdp(const dpulr_srgm_params* params,
                                           double alpha, int strict,
                                           double* impairment_term,
                                           double* main_term);

DPULR_API dpulr_status dpulr_impairment_ratio(const dpulr_srgm_params* params,
                                              double alpha, double* out);

DPULR_API dpulr_status dpulr_alpha_valid(const dpulr_srgm_params* params,
                                         double alpha, int* out);

/* ---- training runs ---- */

typedef struct dpulr_run dpulr_run;

typedef struct dpulr_run_summary {
  uint64_t steps;
  uint64_t steps_per_epoch;
  uint64_t train_size;
  uint64_t valid_size;
  double final_train_acc;
  double final_valid_acc;
  double epsilon;
  double alpha;
  int regime_valid;
} dpulr_run_summary;

/* Relative data paths resolve against the config file's directory. */
DPULR_API dpulr_status dpulr_run_create_from_file(const char* config_path,
                                                  dpulr_run** out);
/* Relative data paths resolve against base_dir (may be NULL). */
DPULR_API dpulr_status dpulr_run_create_from_json(const char* config_json,
                                                  const char* base_dir,
                                                  dpulr_run** out);
/* Loads data and trains. */
DPULR_API dpulr_status dpulr_run_execute(dpulr_run* run);
/* Creates out_dir if needed and writes metrics.csv, params.bin and
 * summary.json. Requires a completed run. */
DPULR_API dpulr_status dpulr_run_write_outputs(const dpulr_run* run,
                                               const char* out_dir);
DPULR_API dpulr_status dpulr_run_get_summary(const dpulr_run* run,
                                             dpulr_run_summary* out);
DPULR_API size_t dpulr_run_num_warnings(const dpulr_run* run);
/* NULL when index is out of range. */
DPULR_API const char* dpulr_run_warning(const dpulr_run* run, size_t index);
DPULR_API void dpulr_run_destroy(dpulr_run* run);

/* ---- gradient verification ---- */

typedef struct dpulr_verify_report dpulr_verify_report;

typedef struct dpulr_verify_layer {
  size_t layer;
  size_t num_params;
  double clean_loss;
  double grad_norm;
  double max_abs_z;
  double max_abs_dev;
  double rel_dev;
  double cov_rel_error;
} dpulr_verify_layer;

DPULR_API dpulr_status dpulr_verify_gradient(uint64_t seed, double sigma,
                                             size_t samples,
                                             dpulr_verify_report** out);
DPULR_API size_t dpulr_verify_num_layers(const dpulr_verify_report* report);
DPULR_API dpulr_status dpulr_verify_get_layer(const dpulr_verify_report* report,
                                              size_t index,
                                              dpulr_verify_layer* out);
DPULR_API void dpulr_verify_destroy(dpulr_verify_report* report);

#ifdef __cplusplus
}
#endif

#endif /* DPULR_DPULR_H_ */
