#ifndef WDT_WDT_H
#define WDT_WDT_H

/* C interface to the work-distribution thermometry toolkit.  All entry
 * points return a wdt_status; on failure wdt_last_error() holds a
 * thread-local description.  Handles are opaque and freed with the matching
 * *_free call.  Strings returned through char** are freed with
 * wdt_string_free. */

#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum wdt_status {
  WDT_OK = 0,
  WDT_ERROR = 1,           /* unexpected failure */
  WDT_CONFIG_ERROR = 2,    /* bad configuration or arguments */
  WDT_NUMERIC_ERROR = 3,   /* numerical failure (quadrature, SVD, ...) */
  WDT_THRESHOLD_ERROR = 4, /* calibration check failed its thresholds */
  WDT_IO_ERROR = 5         /* file read/write failure */
} wdt_status;

typedef struct wdt_config wdt_config;
typedef struct wdt_result wdt_result;

const char* wdt_version(void);
/* Message of the most recent failure on this thread ("" if none). */
const char* wdt_last_error(void);

/* ------------------------------------------------------------------ */
/* configuration                                                      */
/* ------------------------------------------------------------------ */

/* Parse a JSON config (missing keys take defaults, unknown keys fail). */
wdt_status wdt_config_parse(const char* json_text, wdt_config** out);
wdt_status wdt_config_load(const char* path, wdt_config** out);
/* Dotted key with a JSON-literal value, e.g. ("quench.lambda_f", "0.5"). */
wdt_status wdt_config_override(wdt_config* cfg, const char* key, const char* value);
wdt_status wdt_config_dump(const wdt_config* cfg, char** json_out);
wdt_status wdt_config_hash(const wdt_config* cfg, uint64_t* out);
void wdt_config_free(wdt_config* cfg);

/* ------------------------------------------------------------------ */
/* pipeline stages (file based)                                       */
/* ------------------------------------------------------------------ */

/* Exact characteristic-function series of the forward (backward != 0:
 * time-reversed) protocol at cfg.beta_true, written to out_path. */
wdt_status wdt_chi(const wdt_config* cfg, int backward, const char* out_path);

/* Simulated measurement record: reads an exact series, samples
 * 2*n_meas Bernoulli shots per grid point with the derived stream
 * substream_key(cfg.seed, stream), writes the estimator series. */
wdt_status wdt_sample(const wdt_config* cfg, const char* chi_path, uint64_t stream,
                      const char* out_path);

/* Windowed Fourier reconstruction of both work distributions from a
 * forward and a backward series file (grids chosen from short-time
 * cumulant fits of the series). */
wdt_status wdt_reconstruct(const wdt_config* cfg, const char* fwd_chi, const char* bwd_chi,
                           const char* fwd_out, const char* bwd_out);

/* Inference from two work-distribution files; writes posterior/logratio/
 * summary files under cfg.out_dir and returns a result handle. */
wdt_status wdt_infer(const wdt_config* cfg, const char* fwd_dist, const char* bwd_dist,
                     wdt_result** out);

/* ------------------------------------------------------------------ */
/* end-to-end                                                         */
/* ------------------------------------------------------------------ */

/* One full experiment (generate -> sample -> reconstruct -> infer); writes
 * all stage files plus a summary record. */
wdt_status wdt_run(const wdt_config* cfg, wdt_result** out);

/* Calibration sweep over beta_list (or beta_true) with n_experiments runs
 * each; writes per-beta and per-run tables.  With check != 0 the aggregate
 * thresholds are applied; on violation the result is still returned and the
 * status is WDT_THRESHOLD_ERROR. */
wdt_status wdt_calibrate(const wdt_config* cfg, int check, wdt_result** out);

/* Reference-oracle fixture file (expected values for the DERIVED checks). */
wdt_status wdt_oracle_table(const char* out_path);

/* ------------------------------------------------------------------ */
/* results                                                            */
/* ------------------------------------------------------------------ */

/* Numeric field lookup; key is a top-level name ("bayes_beta_mean") or a
 * JSON pointer ("/per_beta/0/mean_beta"). */
wdt_status wdt_result_scalar(const wdt_result* r, const char* key, double* out);
wdt_status wdt_result_json(const wdt_result* r, char** json_out);
void wdt_result_free(wdt_result* r);

void wdt_string_free(char* s);

#ifdef __cplusplus
}
#endif

#endif /* WDT_WDT_H */
