/* biexnex: basket-trial simulation engine, C interface.
 *
 * Usage: create a run, feed it a JSON config (and/or individual options),
 * execute, then iterate the buffered outputs. Nothing is written to disk by
 * the library; every artifact is returned as a named in-memory file.
 *
 * All functions returning int yield BXN_OK or an error code; the message for
 * the most recent failure on the calling thread is available from
 * bxn_last_error(). Handles are not thread-safe; use one per thread.
 */
#ifndef BIEXNEX_H
#define BIEXNEX_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define BXN_API __declspec(dllexport)
#else
#define BXN_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

#define BXN_OK 0
#define BXN_ERR_CONFIG 2   /* invalid config / arguments */
#define BXN_ERR_NUMERIC 3  /* numerical failure during sampling or quadrature */
#define BXN_ERR_INTERNAL 4 /* contract violation or unexpected exception */

typedef struct bxn_run bxn_run;

BXN_API const char* bxn_version(void);

/* Message for the last error raised on this thread; empty string if none. */
BXN_API const char* bxn_last_error(void);

/* NULL only on allocation failure. A fresh run carries the full defaults
 * (oc mode, five models, null-scenario priors). */
BXN_API bxn_run* bxn_run_create(void);
BXN_API void bxn_run_destroy(bxn_run* run);

/* Replace the run's configuration from a JSON document. Parsed eagerly:
 * unknown keys, range violations and syntax errors are reported here, not at
 * execute time. */
BXN_API int bxn_run_set_config_json(bxn_run* run, const char* text);

/* mode: "fit", "oc", "calibrate" or "scenarios". */
BXN_API int bxn_run_set_mode(bxn_run* run, const char* mode);

/* Scalar overrides on top of the current config. Keys: "seed", "n_reps",
 * "threads", "out_dir", "emit_plots", "emit_go_matrices". Values are decimal
 * integers; booleans accept 0/1/true/false. */
BXN_API int bxn_run_set_option(bxn_run* run, const char* key, const char* value);

/* Current value of one of the keys above (booleans render as 0/1). NULL on
 * unknown key. The pointer is invalidated by the next call on this run. */
BXN_API const char* bxn_run_get_option(const bxn_run* run, const char* key);

/* Run the configured command; replaces any previous outputs. */
BXN_API int bxn_run_execute(bxn_run* run);

/* Buffered outputs of the last successful execute, in stable name order. */
BXN_API int bxn_run_output_count(const bxn_run* run);
BXN_API const char* bxn_run_output_name(const bxn_run* run, int index);
/* Body bytes (NUL-terminated as a convenience; CSVs/SVGs never contain NUL).
 * size may be NULL. The pointer stays valid until the next execute/destroy. */
BXN_API const char* bxn_run_output_data(const bxn_run* run, int index, size_t* size);

#ifdef __cplusplus
} /* extern "C" */
#endif

#endif /* BIEXNEX_H */
