/* speclab: spectral-bias laboratory for small fully-connected networks.
 *
 * C interface to the shared library. All functions return a speclab_status;
 * on failure, speclab_last_error() describes what went wrong (thread-local,
 * valid until the next speclab call on the same thread). Reports are opaque
 * handles owned by the caller and released with speclab_report_free().
 */
#ifndef SPECLAB_H
#define SPECLAB_H

#include <stdint.h>

#if defined(_WIN32)
#define SPECLAB_API __declspec(dllexport)
#else
#define SPECLAB_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum speclab_status {
  SPECLAB_OK = 0,
  SPECLAB_ERROR_RUN = 2,    /* a preset or analysis failed while executing */
  SPECLAB_ERROR_CONFIG = 3, /* bad preset name, config file, or override */
  SPECLAB_ERROR_IO = 4,     /* file could not be read or written */
  SPECLAB_ERROR_ARGS = 5    /* null/invalid arguments */
} speclab_status;

typedef struct speclab_report speclab_report;

SPECLAB_API const char* speclab_version(void);
SPECLAB_API const char* speclab_last_error(void);

/* Preset catalog. */
SPECLAB_API int speclab_preset_count(void);
SPECLAB_API const char* speclab_preset_name(int index);
/* Resolved preset config as JSON (thread-local buffer). */
SPECLAB_API const char* speclab_preset_config_json(const char* preset, uint64_t seed);

/* Runs a preset end to end; artifacts and report.json land in out_dir.
 * overrides are dotted-path assignments ("train.max_epochs=500"). The report
 * handle is returned even when the run fails (status SPECLAB_ERROR_RUN) so
 * callers can inspect the failure stage; it may be NULL on config errors. */
SPECLAB_API speclab_status speclab_run_preset(const char* preset, uint64_t seed,
                                              const char* out_dir,
                                              const char* const* overrides, int n_overrides,
                                              int emit_svg, speclab_report** report_out);

/* Same, but the run description comes from a config file (JSON or key=value
 * lines); the file's own preset/seed fields select the experiment. */
SPECLAB_API speclab_status speclab_run_config_file(const char* config_path, const char* out_dir,
                                                   const char* const* overrides, int n_overrides,
                                                   int emit_svg, speclab_report** report_out);

/* Report accessors. */
SPECLAB_API const char* speclab_report_json(const speclab_report* report);
SPECLAB_API int speclab_report_failed(const speclab_report* report);
SPECLAB_API const char* speclab_report_failure_stage(const speclab_report* report);
SPECLAB_API double speclab_report_metric(const speclab_report* report, const char* key,
                                         int* found_out);
SPECLAB_API int speclab_report_metric_count(const speclab_report* report);
SPECLAB_API const char* speclab_report_metric_name(const speclab_report* report, int index);
SPECLAB_API void speclab_report_free(speclab_report* report);

/* Fourier spectrum of stored parameters (params sidecar JSON + .bin blob),
 * written as CSV (k, re, im, power); out_svg may be NULL. */
SPECLAB_API speclab_status speclab_spectrum_to_csv(const char* params_json_path,
                                                   double domain_min, double domain_max,
                                                   int n_points, const char* out_csv,
                                                   const char* out_svg);

/* Hessian flatness metrics of stored parameters on a dataset CSV, written as
 * a JSON report. loss is "mse", "bce", or "crossentropy". */
SPECLAB_API speclab_status speclab_flatness_to_json(const char* params_json_path,
                                                    const char* dataset_csv_path,
                                                    const char* loss, int n_probes,
                                                    int power_iters, double power_tol,
                                                    int top_k, uint64_t seed,
                                                    const char* out_json);

#ifdef __cplusplus
}
#endif

#endif /* SPECLAB_H */
