#ifndef SWWE_H
#define SWWE_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum SwweStatus {
  SWWE_STATUS_OK = 0,
  SWWE_STATUS_NULL_POINTER = 1,
  SWWE_STATUS_INVALID_ARGUMENT = 2,
  SWWE_STATUS_INVALID_CONFIG = 3,
  SWWE_STATUS_INCONSISTENT = 4,
  SWWE_STATUS_REGIME = 5,
  SWWE_STATUS_INADMISSIBLE = 6,
  SWWE_STATUS_LAYOUT = 7,
  SWWE_STATUS_GRID = 8,
  SWWE_STATUS_SHAPE = 9,
  SWWE_STATUS_DIVERGED = 10,
  SWWE_STATUS_PANIC = 11,
} SwweStatus;

typedef enum SwweFlowKind {
  SWWE_FLOW_KIND_SUB_CRITICAL = 0,
  SWWE_FLOW_KIND_CRITICAL = 1,
  SWWE_FLOW_KIND_SUPER_CRITICAL = 2,
} SwweFlowKind;

typedef enum SwweDissipationScale {
  SWWE_DISSIPATION_SCALE_HALF = 0,
  SWWE_DISSIPATION_SCALE_FULL = 1,
} SwweDissipationScale;

typedef enum SwweScenario {
  SWWE_SCENARIO_SMOOTH_PULSE = 0,
  SWWE_SCENARIO_STEP_PULSE = 1,
  SWWE_SCENARIO_MMS = 2,
  SWWE_SCENARIO_ZERO_RANDOM = 3,
} SwweScenario;

/**
 * Opaque simulation handle.
 */
typedef struct SwweSimulation SwweSimulation;

/**
 * Linearization state: gravity `g`, mean depth `H`, mean velocity `U`.
 */
typedef struct SwweFlow {
  double gravity;
  double depth;
  double velocity;
} SwweFlow;

/**
 * Scaled eigenvalues and the orthonormal eigenvector matrix, row-major
 * (`s[0] s[1]` is the first row).
 */
typedef struct SwweSpectral {
  enum SwweFlowKind kind;
  /**
   * Sign of `U`: -1, 0 or 1.
   */
  int32_t direction;
  double lambda1;
  double lambda2;
  double c;
  double d;
  double s[4];
} SwweSpectral;

typedef struct SwweRunOptions {
  /**
   * Number of intervals; the grid has `n + 1` nodes.
   */
  size_t n;
  double alpha;
  enum SwweDissipationScale dissipation_scale;
  double cr;
  enum SwweScenario scenario;
  /**
   * Seed for the random scenario.
   */
  uint64_t seed;
} SwweRunOptions;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Copy the message of the last failed call on this thread into `buf`
 * (NUL-terminated, truncated to `len`). Returns the full message length
 * including the terminator; pass `buf = NULL` to query it.
 *
 * # Safety
 * `buf` must be null or valid for `len` bytes.
 */
size_t swwe_last_error_message(char *buf, size_t len);

/**
 * Library version as a static NUL-terminated string.
 */
const char *swwe_version(void);

/**
 * # Safety
 * `flow` and `out` must be null or valid pointers.
 */
enum SwweStatus swwe_spectral_data(const struct SwweFlow *flow_, struct SwweSpectral *out);

/**
 * Reflection coefficients for sub-critical flow; other regimes return
 * `SWWE_STATUS_REGIME`.
 *
 * # Safety
 * All pointers must be null or valid.
 */
enum SwweStatus swwe_reflection_coefficients(const struct SwweFlow *flow_,
                                             double *gamma0,
                                             double *gamma1);

/**
 * Set up a simulation of `options.scenario` with the default penalties at
 * `t = 0`. On success `*out` owns a handle for [`swwe_simulation_free`].
 *
 * # Safety
 * All pointers must be null or valid.
 */
enum SwweStatus swwe_simulation_new(const struct SwweFlow *flow_,
                                    const struct SwweRunOptions *options,
                                    struct SwweSimulation **out);

/**
 * Release a handle; null is ignored.
 *
 * # Safety
 * `sim` must be null or a handle from [`swwe_simulation_new`] that has not
 * been freed.
 */
void swwe_simulation_free(struct SwweSimulation *sim);

/**
 * Integrate to `t_target`; the last step is shortened to land on it.
 *
 * # Safety
 * `sim` must be null or a live handle.
 */
enum SwweStatus swwe_simulation_advance(struct SwweSimulation *sim, double t_target);

/**
 * Number of grid nodes (`n + 1`); 0 for a null handle.
 *
 * # Safety
 * `sim` must be null or a live handle.
 */
size_t swwe_simulation_nodes(const struct SwweSimulation *sim);

/**
 * # Safety
 * `sim` and `out` must be null or valid.
 */
enum SwweStatus swwe_simulation_time(const struct SwweSimulation *sim, double *out);

/**
 * Copy nodes, depth and velocity perturbations into caller buffers of
 * `len` entries each (`len` must equal the node count). Any of the three
 * buffers may be null to skip it.
 *
 * # Safety
 * Non-null buffers must be valid for `len` doubles.
 */
enum SwweStatus swwe_simulation_copy_state(const struct SwweSimulation *sim,
                                           double *x,
                                           double *h,
                                           double *u,
                                           size_t len);

/**
 * Discrete energy `sum |I_i| (g h_i^2 + H u_i^2)` of the current state.
 *
 * # Safety
 * `sim` and `out` must be null or valid.
 */
enum SwweStatus swwe_simulation_energy(const struct SwweSimulation *sim, double *out);

/**
 * Volume-weighted L2 errors against the exact solution at the current
 * time; `SWWE_STATUS_INVALID_ARGUMENT` if the scenario has none.
 *
 * # Safety
 * All pointers must be null or valid.
 */
enum SwweStatus swwe_simulation_l2_error(const struct SwweSimulation *sim,
                                         double *h_error,
                                         double *u_error);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SWWE_H */
