/* Copyright 2026 The vislab Authors
 * SPDX-License-Identifier: Apache-2.0
 *
 * C interface to the vislab library. Every function returns a vislab_status;
 * on failure vislab_last_error() describes the cause for the calling thread.
 * Handles are opaque and released by their matching *_free function, which
 * accepts NULL.
 */
#ifndef VISLAB_VISLAB_H_
#define VISLAB_VISLAB_H_

#include <stddef.h>
#include <stdint.h>

#if defined(VISLAB_BUILDING_SHARED)
#define VISLAB_API __attribute__((visibility("default")))
#else
#define VISLAB_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum vislab_status {
  VISLAB_OK = 0,
  VISLAB_ERR_INVALID_ARGUMENT = 1,
  VISLAB_ERR_NUMERICAL = 2,
  VISLAB_ERR_CONFIG = 3,
  VISLAB_ERR_IO = 4,
  VISLAB_ERR_INTERNAL = 5
} vislab_status;

typedef struct vislab_string vislab_string;
typedef struct vislab_config vislab_config;
typedef struct vislab_result vislab_result;

VISLAB_API const char* vislab_version(void);
/* Message of the last failed call on this thread; empty after success. */
VISLAB_API const char* vislab_last_error(void);
VISLAB_API const char* vislab_status_name(vislab_status status);

VISLAB_API const char* vislab_string_data(const vislab_string* s);
VISLAB_API size_t vislab_string_size(const vislab_string* s);
VISLAB_API void vislab_string_free(vislab_string* s);

/* Configuration. Overrides use dotted paths such as "grid.n"; values are
 * parsed as JSON when possible and kept as strings otherwise. */
VISLAB_API vislab_status vislab_config_load(const char* path, vislab_config** out);
VISLAB_API vislab_status vislab_config_parse(const char* json_text, vislab_config** out);
VISLAB_API vislab_status vislab_config_preset(const char* name, vislab_config** out);
VISLAB_API vislab_status vislab_config_override(vislab_config* cfg, const char* key,
                                                const char* value);
VISLAB_API vislab_status vislab_config_validate(const vislab_config* cfg);
VISLAB_API vislab_status vislab_config_to_json(const vislab_config* cfg, vislab_string** out);
VISLAB_API vislab_status vislab_config_run_id(const vislab_config* cfg, vislab_string** out);
VISLAB_API vislab_status vislab_config_output_dir(const vislab_config* cfg, vislab_string** out);
VISLAB_API void vislab_config_free(vislab_config* cfg);

/* Experiments. */
VISLAB_API vislab_status vislab_experiment_run(const vislab_config* cfg, vislab_result** out);
/* Writes the report files into dir and returns the summary JSON. */
VISLAB_API vislab_status vislab_result_emit(const vislab_result* res, const char* dir,
                                            vislab_string** summary);
/* 1 when every per-row invariant held and every leg completed. */
VISLAB_API vislab_status vislab_result_checks_ok(const vislab_result* res, int* ok);
VISLAB_API vislab_status vislab_result_row_count(const vislab_result* res, size_t* rows);
VISLAB_API void vislab_result_free(vislab_result* res);

/* Rate fitting of a rates CSV. Returns the fits CSV and a JSON array of
 * warnings. bootstrap = 0 selects a Student-t interval. */
VISLAB_API vislab_status vislab_fit_csv(const char* rates_csv, int bootstrap, uint64_t seed,
                                        vislab_string** fits_csv, vislab_string** warnings);

/* Invariant suites. passed is 1 when every check of the suite held. */
VISLAB_API vislab_status vislab_check_suite_names(vislab_string** json_array);
VISLAB_API vislab_status vislab_check_run(const char* suite, uint64_t seed, int instances,
                                          int workers, vislab_string** report, int* passed);

/* Small-instance reference solvers. The request is a JSON object with a
 * "kind" of "assignment", "hm1_direct", "taylor_green" or "crossover". */
VISLAB_API vislab_status vislab_oracle(const char* request_json, vislab_string** response);

#ifdef __cplusplus
}
#endif

#endif /* VISLAB_VISLAB_H_ */
