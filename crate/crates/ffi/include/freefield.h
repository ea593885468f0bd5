#ifndef FREEFIELD_H
#define FREEFIELD_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum FfStatus {
  FF_STATUS_OK = 0,
  /**
   * A run completed and at least one check failed.
   */
  FF_STATUS_CHECK_FAILED = 1,
  FF_STATUS_CONFIG = 2,
  FF_STATUS_INPUT = 3,
  FF_STATUS_NULL_POINTER = 4,
  FF_STATUS_DEGENERATE = 5,
  /**
   * Quadrature, fit or identity failure raised as an error.
   */
  FF_STATUS_NUMERICAL = 6,
  FF_STATUS_IO = 7,
  FF_STATUS_PANIC = 8,
} FfStatus;

/**
 * Suite configuration.
 */
typedef struct FfConfig FfConfig;

/**
 * Sampled single-measurement density.
 */
typedef struct FfDensity FfDensity;

/**
 * Result of a verification run: the report document and its CSV artifacts.
 */
typedef struct FfRun FfRun;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failing call on this thread, or null. Valid until the
 * next failing call; do not free.
 */
const char *ff_last_error(void);

/**
 * Library version as a static string; do not free.
 */
const char *ff_version(void);

/**
 * # Safety
 * `s` must be null or a string returned by this library, not yet freed.
 */
void ff_string_free(char *s);

/**
 * Default configuration: every suite except the width scan.
 */
struct FfConfig *ff_config_new(void);

/**
 * # Safety
 * `json` must be a nul-terminated string and `out` a valid pointer.
 */
enum FfStatus ff_config_from_json(const char *json, struct FfConfig **out);

/**
 * # Safety
 * `config` must be null or a handle from this library, not yet freed.
 */
void ff_config_free(struct FfConfig *config);

/**
 * Replaces the suite selection with a comma-separated list of names.
 *
 * # Safety
 * `config` must be a live handle and `names` a nul-terminated string.
 */
enum FfStatus ff_config_set_suites(struct FfConfig *config, const char *names);

/**
 * # Safety
 * `config` must be a live handle.
 */
enum FfStatus ff_config_set_seed(struct FfConfig *config, uint64_t seed);

/**
 * Uses `trials` for every suite.
 *
 * # Safety
 * `config` must be a live handle.
 */
enum FfStatus ff_config_set_trials(struct FfConfig *config, size_t trials);

/**
 * # Safety
 * `config` must be a live handle.
 */
enum FfStatus ff_config_set_mass(struct FfConfig *config, double mass);

/**
 * # Safety
 * `config` must be a live handle.
 */
enum FfStatus ff_config_set_quad_order(struct FfConfig *config, size_t order);

/**
 * Caps every check tolerance at `tol`.
 *
 * # Safety
 * `config` must be a live handle.
 */
enum FfStatus ff_config_set_rel_tol(struct FfConfig *config, double tol);

/**
 * The configuration as JSON.
 *
 * # Safety
 * `config` must be a live handle and `out` a valid pointer.
 */
enum FfStatus ff_config_to_json(const struct FfConfig *config, char **out);

/**
 * Runs the configured suites. Returns `FF_STATUS_OK` when every check
 * passes and `FF_STATUS_CHECK_FAILED` when one does; `*out` is set in both
 * cases and must be released with [`ff_run_free`].
 *
 * # Safety
 * `config` must be a live handle and `out` a valid pointer.
 */
enum FfStatus ff_run(const struct FfConfig *config, struct FfRun **out);

/**
 * # Safety
 * `run` must be null or a handle from [`ff_run`], not yet freed.
 */
void ff_run_free(struct FfRun *run);

/**
 * 1 when every check passed, 0 otherwise (including a null handle).
 *
 * # Safety
 * `run` must be null or a live handle.
 */
int32_t ff_run_passed(const struct FfRun *run);

/**
 * Total number of checks over all suites.
 *
 * # Safety
 * `run` must be null or a live handle.
 */
size_t ff_run_check_count(const struct FfRun *run);

/**
 * Number of failing checks.
 *
 * # Safety
 * `run` must be null or a live handle.
 */
size_t ff_run_failure_count(const struct FfRun *run);

/**
 * The report document, byte-identical to `report.json`.
 *
 * # Safety
 * `run` must be a live handle and `out` a valid pointer.
 */
enum FfStatus ff_run_report_json(const struct FfRun *run, char **out);

/**
 * Writes `report.json` and the CSV artifacts into `dir`.
 *
 * # Safety
 * `run` must be a live handle and `dir` a nul-terminated path.
 */
enum FfStatus ff_run_write(const struct FfRun *run, const char *dir);

/**
 * Density for `(U,U) = s` with forward-shell part `s_plus`, on the default
 * 401-point grid.
 *
 * # Safety
 * `out` must be a valid pointer.
 */
enum FfStatus ff_density_new(double s, double s_plus, struct FfDensity **out);

/**
 * # Safety
 * `d` must be null or a handle from [`ff_density_new`], not yet freed.
 */
void ff_density_free(struct FfDensity *d);

/**
 * ρ(v); NaN for a null handle.
 *
 * # Safety
 * `d` must be null or a live handle.
 */
double ff_density_rho(const struct FfDensity *d, double v);

/**
 * # Safety
 * `d` must be null or a live handle.
 */
size_t ff_density_len(const struct FfDensity *d);

/**
 * Grid point `i` and its density.
 *
 * # Safety
 * `d` must be a live handle; `v` and `rho` valid pointers.
 */
enum FfStatus ff_density_sample(const struct FfDensity *d, size_t i, double *v, double *rho);

/**
 * # Safety
 * `d` must be a live handle and `out` a valid pointer.
 */
enum FfStatus ff_density_csv(const struct FfDensity *d, char **out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* FREEFIELD_H */
