#ifndef COVSCAT_H
#define COVSCAT_H

#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>

#define COVSCAT_POTENTIAL_ZERO 0

#define COVSCAT_POTENTIAL_SQUARE_WELL 1

#define COVSCAT_POTENTIAL_GAUSSIAN 2

typedef enum CovscatStatus {
  COVSCAT_STATUS_OK = 0,
  COVSCAT_STATUS_NULL_POINTER = 1,
  COVSCAT_STATUS_INVALID_ARGUMENT = 2,
  /**
   * Invalid configuration or parameters.
   */
  COVSCAT_STATUS_CONFIG = 3,
  /**
   * A numerical stage failed; see the last error message.
   */
  COVSCAT_STATUS_NUMERICAL = 4,
  /**
   * The output buffer is too small; the required size was written.
   */
  COVSCAT_STATUS_BUFFER_TOO_SMALL = 5,
  COVSCAT_STATUS_PANIC = 6,
} CovscatStatus;

/**
 * Run configuration.
 */
typedef struct CovscatConfig CovscatConfig;

/**
 * Mass operator on one radial channel, with its eigendecomposition.
 */
typedef struct CovscatMassOperator CovscatMassOperator;

/**
 * Result of one experiment run.
 */
typedef struct CovscatRun CovscatRun;

/**
 * `kind` is one of the COVSCAT_POTENTIAL_* constants; `length` is the well radius or the Gaussian width.
 */
typedef struct CovscatPotential {
  uint32_t kind;
  double depth;
  double length;
} CovscatPotential;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread.
 *
 * # Safety
 * `buf` must hold `len` bytes or be null; `needed` may be null.
 */
enum CovscatStatus covscat_last_error(char *buf, size_t len, size_t *needed);

/**
 * Center decomposition of `n` momenta. `momenta` holds 4n values (E, px, py, pz);
 * `u` receives 4 values and `q` 4n.
 *
 * # Safety
 * Pointers must reference arrays of the stated sizes.
 */
enum CovscatStatus covscat_to_center(size_t n,
                                     const double *momenta,
                                     const double *masses,
                                     double *u,
                                     double *q);

/**
 * Inverse of [`covscat_to_center`]: momenta (4n values) from u (4) and q (4n).
 *
 * # Safety
 * Pointers must reference arrays of the stated sizes.
 */
enum CovscatStatus covscat_from_center(size_t n,
                                       const double *u,
                                       const double *q,
                                       const double *masses,
                                       double *momenta);

/**
 * Principal-branch phase shift δ_l(z) from the stationary radial equation.
 *
 * # Safety
 * `delta` must be a valid pointer.
 */
enum CovscatStatus covscat_phase_shift(uint32_t l,
                                       double m1,
                                       double m2,
                                       struct CovscatPotential v,
                                       double z,
                                       double *delta);

/**
 * Builds M′ = M + V on `n` points out to `radius`.
 *
 * # Safety
 * `out` must be a valid pointer; the handle is released with [`covscat_mass_operator_free`].
 */
enum CovscatStatus covscat_mass_operator_new(uint32_t l,
                                             size_t n,
                                             double radius,
                                             double m1,
                                             double m2,
                                             struct CovscatPotential v,
                                             struct CovscatMassOperator **out);

/**
 * # Safety
 * `op` must come from [`covscat_mass_operator_new`] and not be used afterwards; null is ignored.
 */
void covscat_mass_operator_free(struct CovscatMassOperator *op);

/**
 * # Safety
 * `op` must be a live handle; `dim` a valid pointer.
 */
enum CovscatStatus covscat_mass_operator_dim(const struct CovscatMassOperator *op, size_t *dim);

/**
 * Copies the ascending eigenvalues into `values` (length ≥ dim).
 *
 * # Safety
 * `op` must be a live handle and `values` hold `len` doubles.
 */
enum CovscatStatus covscat_mass_operator_eigenvalues(const struct CovscatMassOperator *op,
                                                     double *values,
                                                     size_t len);

/**
 * # Safety
 * `op` must be a live handle; `count` a valid pointer.
 */
enum CovscatStatus covscat_mass_operator_bound_states(const struct CovscatMassOperator *op,
                                                      size_t *count);

/**
 * Configuration from TOML text; an empty string gives the defaults.
 *
 * # Safety
 * `toml` must be a NUL-terminated string and `out` a valid pointer.
 */
enum CovscatStatus covscat_config_from_toml(const char *toml, struct CovscatConfig **out);

/**
 * # Safety
 * `cfg` must come from [`covscat_config_from_toml`]; null is ignored.
 */
void covscat_config_free(struct CovscatConfig *cfg);

/**
 * Applies one `key.path=value` override.
 *
 * # Safety
 * `cfg` must be a live handle and `assignment` a NUL-terminated string.
 */
enum CovscatStatus covscat_config_set(struct CovscatConfig *cfg, const char *assignment);

/**
 * Diagnostics joined by newlines (empty when valid); `count` receives their number.
 *
 * # Safety
 * `cfg` must be a live handle; `buf` holds `len` bytes or is null; `count` and `needed` may be null.
 */
enum CovscatStatus covscat_config_validate(const struct CovscatConfig *cfg,
                                           size_t *count,
                                           char *buf,
                                           size_t len,
                                           size_t *needed);

/**
 * SHA-256 config digest as 64 hex characters.
 *
 * # Safety
 * `cfg` must be a live handle; `buf` holds `len` bytes.
 */
enum CovscatStatus covscat_config_digest(const struct CovscatConfig *cfg, char *buf, size_t len);

/**
 * Validates and runs the configured experiment. A failing numerical stage returns
 * `Numerical` with the stage named in the error message.
 *
 * # Safety
 * `cfg` must be a live handle and `out` a valid pointer; release the run with [`covscat_run_free`].
 */
enum CovscatStatus covscat_run(const struct CovscatConfig *cfg, struct CovscatRun **out);

/**
 * # Safety
 * `run` must come from [`covscat_run`]; null is ignored.
 */
void covscat_run_free(struct CovscatRun *run);

/**
 * Whether every verdict passed, and the number of verdicts.
 *
 * # Safety
 * `run` must be a live handle; output pointers may be null.
 */
enum CovscatStatus covscat_run_passed(const struct CovscatRun *run, bool *passed, size_t *verdicts);

/**
 * Verdict `index`: pass flag, measured value and tolerance.
 *
 * # Safety
 * `run` must be a live handle; output pointers may be null.
 */
enum CovscatStatus covscat_run_verdict(const struct CovscatRun *run,
                                       size_t index,
                                       bool *pass,
                                       double *value,
                                       double *tolerance);

/**
 * Name of verdict `index`.
 *
 * # Safety
 * `run` must be a live handle; `buf` holds `len` bytes or is null.
 */
enum CovscatStatus covscat_run_verdict_name(const struct CovscatRun *run,
                                            size_t index,
                                            char *buf,
                                            size_t len,
                                            size_t *needed);

/**
 * Run summary as JSON.
 *
 * # Safety
 * `run` must be a live handle; `buf` holds `len` bytes or is null.
 */
enum CovscatStatus covscat_run_summary_json(const struct CovscatRun *run,
                                            char *buf,
                                            size_t len,
                                            size_t *needed);

/**
 * Writes the run's artifacts into `dir`.
 *
 * # Safety
 * `run` must be a live handle and `dir` a NUL-terminated path.
 */
enum CovscatStatus covscat_run_write(const struct CovscatRun *run, const char *dir, bool plot_data);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* COVSCAT_H */
