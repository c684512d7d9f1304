#ifndef TRAJADV_H
#define TRAJADV_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status codes. Values 2 and 3 match the CLI exit codes.
 */
typedef enum {
  TRAJADV_STATUS_OK = 0,
  /**
   * Contract violation or any error without a more specific code.
   */
  TRAJADV_STATUS_FAILED = 1,
  TRAJADV_STATUS_CONFIG = 2,
  /**
   * Singular task map or non-finite values during a run.
   */
  TRAJADV_STATUS_NUMERICAL = 3,
  TRAJADV_STATUS_NULL_POINTER = 4,
  TRAJADV_STATUS_IO = 5,
  /**
   * Argument out of range or not valid UTF-8.
   */
  TRAJADV_STATUS_INVALID_ARGUMENT = 6,
  TRAJADV_STATUS_PANIC = 7,
} TrajadvStatus;

typedef enum {
  TRAJADV_MODE_CANCEL_ALL = 0,
  TRAJADV_MODE_RETAIN_HELPFUL = 1,
} TrajadvMode;

/**
 * Parsed and validated run configuration.
 */
typedef struct TrajadvConfig TrajadvConfig;

/**
 * Log and summary of a finished run.
 */
typedef struct TrajadvRun TrajadvRun;

/**
 * One log row without the torque vector; see [`trajadv_run_row_tau`].
 */
typedef struct {
  double t;
  /**
   * Stand-up phase number, 1 to 4.
   */
  uint8_t phase;
  double psi;
  double psi_dot;
  double x[6];
  double x_d[6];
  double xdot[6];
  double xdot_d[6];
  double f_hands[6];
  double f_feet[6];
  double alpha;
} TrajadvRow;

typedef struct {
  size_t steps;
  double final_time;
  double final_psi;
  /**
   * False when the goal pose was never reached; `time_to_goal` is then NaN.
   */
  bool reached_goal;
  double time_to_goal;
  double max_psi_dot;
  size_t transitions;
} TrajadvSummary;

typedef struct {
  double alpha;
  double beta;
  double par_dir[6];
  double perp_dir[6];
} TrajadvDecomposition;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, or null after a
 * successful call. The pointer stays valid until the next call on the same
 * thread.
 */
const char *trajadv_last_error_message(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *trajadv_version(void);

/**
 * Parse a TOML configuration held in memory.
 *
 * # Safety
 * `toml` must be a NUL-terminated string and `out` a valid pointer.
 */
TrajadvStatus trajadv_config_from_toml(const char *toml, TrajadvConfig **out);

/**
 * Load a TOML configuration file.
 *
 * # Safety
 * `path` must be a NUL-terminated string and `out` a valid pointer.
 */
TrajadvStatus trajadv_config_load(const char *path, TrajadvConfig **out);

/**
 * Turn free-parameter advancement on or off.
 *
 * # Safety
 * `config` must be a live handle from this library.
 */
TrajadvStatus trajadv_config_set_advancement(TrajadvConfig *config, bool enabled);

/**
 * # Safety
 * `config` must be a live handle from this library.
 */
TrajadvStatus trajadv_config_set_mode(TrajadvConfig *config, TrajadvMode mode);

/**
 * Copy of `config` with every hands pulse removed.
 *
 * # Safety
 * `config` must be a live handle and `out` a valid pointer.
 */
TrajadvStatus trajadv_config_unassisted(const TrajadvConfig *config, TrajadvConfig **out);

/**
 * # Safety
 * `config` must be null or a handle from this library not yet freed.
 */
void trajadv_config_free(TrajadvConfig *config);

/**
 * Run the closed-loop simulation described by `config`.
 *
 * # Safety
 * `config` must be a live handle and `out` a valid pointer.
 */
TrajadvStatus trajadv_run(const TrajadvConfig *config, TrajadvRun **out);

/**
 * Number of log rows, or 0 for a null handle.
 *
 * # Safety
 * `run` must be null or a live handle.
 */
size_t trajadv_run_row_count(const TrajadvRun *run);

/**
 * Length of the torque vector of every row, or 0 for a null handle.
 *
 * # Safety
 * `run` must be null or a live handle.
 */
size_t trajadv_run_tau_len(const TrajadvRun *run);

/**
 * # Safety
 * `run` must be a live handle and `out` a valid pointer.
 */
TrajadvStatus trajadv_run_row(const TrajadvRun *run, size_t index, TrajadvRow *out);

/**
 * Copy the torques of row `index` into `out`, which holds `len` doubles.
 * `len` must equal [`trajadv_run_tau_len`].
 *
 * # Safety
 * `run` must be a live handle and `out` must point to `len` writable doubles.
 */
TrajadvStatus trajadv_run_row_tau(const TrajadvRun *run, size_t index, double *out, size_t len);

/**
 * # Safety
 * `run` must be a live handle and `out` a valid pointer.
 */
TrajadvStatus trajadv_run_summary(const TrajadvRun *run, TrajadvSummary *out);

/**
 * Write `log.csv` and the SVG plots of `run` into directory `dir`. The
 * reference curve of `config` is drawn as the nominal trace.
 *
 * # Safety
 * Handles must be live and `dir` a NUL-terminated string.
 */
TrajadvStatus trajadv_run_write_artifacts(const TrajadvRun *run,
                                          const TrajadvConfig *config,
                                          const char *dir);

/**
 * # Safety
 * `run` must be null or a handle from this library not yet freed.
 */
void trajadv_run_free(TrajadvRun *run);

/**
 * Clamped free-parameter rate for a measured task velocity and curve
 * tangent, both 6 doubles.
 *
 * # Safety
 * `xdot` and `curve_deriv` must point to 6 doubles, `out` to one.
 */
TrajadvStatus trajadv_psi_dot_update(const double *xdot,
                                     const double *curve_deriv,
                                     double psi_dot_upper,
                                     double eps_v,
                                     double *out);

/**
 * Split an induced task acceleration along and across a desired velocity.
 *
 * # Safety
 * `omega_f` and `xdot_d` must point to 6 doubles, `out` to a writable struct.
 */
TrajadvStatus trajadv_decompose(const double *omega_f,
                                const double *xdot_d,
                                double eps_v,
                                TrajadvDecomposition *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* TRAJADV_H */
