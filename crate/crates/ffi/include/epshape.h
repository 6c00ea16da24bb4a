#ifndef EPSHAPE_H
#define EPSHAPE_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result code of every fallible call.
 */
typedef enum {
  EPS_STATUS_OK = 0,
  /**
   * A required pointer argument was null.
   */
  EPS_STATUS_NULL = 1,
  /**
   * The scenario text is not well-formed.
   */
  EPS_STATUS_PARSE = 2,
  /**
   * The scenario is well-formed but violates a constraint.
   */
  EPS_STATUS_VALIDATION = 3,
  /**
   * Integration or an eigen-solve produced non-finite values or failed.
   */
  EPS_STATUS_NUMERICAL = 4,
  /**
   * The requested equilibrium is not a fixed point.
   */
  EPS_STATUS_NOT_EQUILIBRIUM = 5,
  /**
   * A string argument is not valid UTF-8.
   */
  EPS_STATUS_UTF8 = 6,
  /**
   * A Rust panic was caught at the boundary.
   */
  EPS_STATUS_PANIC = 7,
  /**
   * A caller buffer is too small or an index is out of range.
   */
  EPS_STATUS_RANGE = 8,
  /**
   * A file could not be read.
   */
  EPS_STATUS_IO = 9,
} EpsStatus;

/**
 * A parsed and validated scenario.
 */
typedef struct EpsScenario EpsScenario;

/**
 * A simulated trajectory together with the parameters that produced it.
 */
typedef struct EpsTrajectory EpsTrajectory;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread; empty after a success.
 * The pointer stays valid until the next epshape call on this thread.
 */
const char *eps_last_error(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *eps_version(void);

/**
 * Releases a string returned by this library. Null is ignored.
 *
 * # Safety
 * `s` must come from an epshape `char **` output and not be freed twice.
 */
void eps_string_free(char *s);

/**
 * Parses scenario JSON.
 *
 * # Safety
 * `json` must be a NUL-terminated string; `out` must be writable.
 */
EpsStatus eps_scenario_parse(const char *json, EpsScenario **out);

/**
 * Reads and parses a scenario file.
 *
 * # Safety
 * `path` must be a NUL-terminated string; `out` must be writable.
 */
EpsStatus eps_scenario_load(const char *path, EpsScenario **out);

/**
 * # Safety
 * `s` must be null or a handle from `eps_scenario_parse`/`eps_scenario_load`.
 */
void eps_scenario_free(EpsScenario *s);

/**
 * Canonical JSON of the scenario, with the initial state made explicit.
 *
 * # Safety
 * `s` must be a live scenario handle; `out` must be writable.
 */
EpsStatus eps_scenario_to_json(const EpsScenario *s, char **out);

/**
 * Number of stability-condition warnings raised while validating.
 *
 * # Safety
 * `s` must be null or a live scenario handle.
 */
size_t eps_scenario_warning_count(const EpsScenario *s);

/**
 * Integrates the scenario. With `reconstruct` nonzero the group trajectory
 * is integrated alongside, starting at the identity.
 *
 * # Safety
 * `s` must be a live scenario handle; `out` must be writable.
 */
EpsStatus eps_simulate(const EpsScenario *s, int32_t reconstruct, EpsTrajectory **out);

/**
 * # Safety
 * `t` must be null or a handle from `eps_simulate`.
 */
void eps_trajectory_free(EpsTrajectory *t);

/**
 * Number of samples, including t = 0. Zero for a null handle.
 *
 * # Safety
 * `t` must be null or a live trajectory handle.
 */
size_t eps_trajectory_len(const EpsTrajectory *t);

/**
 * Length of one flat phase-space sample: Π, P, then the advected fields
 * the system carries (Γ, h, Θ, Δ₁, δ₁, Δ₂, δ₂ in that order).
 *
 * # Safety
 * `t` must be null or a live trajectory handle.
 */
size_t eps_trajectory_state_dim(const EpsTrajectory *t);

/**
 * Copies the sample times into `buf[0..len)`.
 *
 * # Safety
 * `buf` must hold `len` doubles.
 */
EpsStatus eps_trajectory_times(const EpsTrajectory *t, double *buf, size_t len);

/**
 * Copies the total energy at every sample into `buf[0..len)`.
 *
 * # Safety
 * `buf` must hold `len` doubles.
 */
EpsStatus eps_trajectory_energy(const EpsTrajectory *t, double *buf, size_t len);

/**
 * Copies sample `index` as a flat phase point into `buf[0..len)`.
 *
 * # Safety
 * `buf` must hold `len` doubles.
 */
EpsStatus eps_trajectory_state(const EpsTrajectory *t, size_t index, double *buf, size_t len);

/**
 * Copies pose `index` as R (row-major, 9 values) followed by x (3 values).
 * Fails with `Validation` when the trajectory was simulated without poses.
 *
 * # Safety
 * `buf` must hold `len` doubles.
 */
EpsStatus eps_trajectory_pose(const EpsTrajectory *t, size_t index, double *buf, size_t len);

/**
 * Trajectory as CSV text, one row per sample.
 *
 * # Safety
 * `t` must be a live trajectory handle; `out` must be writable.
 */
EpsStatus eps_trajectory_csv(const EpsTrajectory *t, char **out);

/**
 * Linearizes the closed loop at the scenario's equilibrium and returns the
 * stability report as JSON.
 *
 * # Safety
 * `s` must be a live scenario handle; `out` must be writable.
 */
EpsStatus eps_stability_json(const EpsScenario *s, char **out);

/**
 * Runs the property suite. `filter` may be null. `passed` receives 1 when
 * every selected property holds.
 *
 * # Safety
 * `filter` must be null or NUL-terminated; `out` and `passed` must be writable.
 */
EpsStatus eps_verify_json(uint64_t seed, const char *filter, char **out, int32_t *passed);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* EPSHAPE_H */
