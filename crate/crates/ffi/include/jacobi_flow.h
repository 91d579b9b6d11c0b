#ifndef JACOBI_FLOW_H
#define JACOBI_FLOW_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>

typedef enum JfChart {
  JF_CHART_NONE = 0,
  JF_CHART_CARTESIAN = 1,
  JF_CHART_POLAR = 2,
  JF_CHART_SPHERICAL = 3,
} JfChart;

typedef enum JfFlowKind {
  JF_FLOW_KIND_HAMILTON = 0,
  JF_FLOW_KIND_JACOBI = 1,
} JfFlowKind;

typedef enum JfOrbitClass {
  JF_ORBIT_CLASS_ELLIPSE = 0,
  JF_ORBIT_CLASS_PARABOLA = 1,
  JF_ORBIT_CLASS_HYPERBOLA = 2,
} JfOrbitClass;

typedef enum JfStatus {
  JF_STATUS_OK = 0,
  JF_STATUS_NULL_POINTER = 1,
  JF_STATUS_DOMAIN_VIOLATION = 2,
  JF_STATUS_SINGULAR_MATRIX = 3,
  JF_STATUS_TURNING_POINT = 4,
  JF_STATUS_STEP_FAILURE = 5,
  JF_STATUS_POLE = 6,
  JF_STATUS_DIMENSION_MISMATCH = 7,
  JF_STATUS_INVALID_INPUT = 8,
  JF_STATUS_EMPTY_TRAJECTORY = 9,
  JF_STATUS_PANIC = 10,
} JfStatus;

typedef enum JfTermination {
  JF_TERMINATION_COMPLETED = 0,
  JF_TERMINATION_TURNING_POINT = 1,
  JF_TERMINATION_DOMAIN_VIOLATION = 2,
  JF_TERMINATION_STEP_FAILURE = 3,
} JfTermination;

/**
 * A catalog entry.
 */
typedef struct JfCatalog JfCatalog;

/**
 * A mechanical system `(g, U, m, E)`.
 */
typedef struct JfSystem JfSystem;

/**
 * An integrated trajectory.
 */
typedef struct JfTrajectory JfTrajectory;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread, or NULL. The pointer
 * stays valid until the next failing call on the same thread.
 */
const char *jf_last_error(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *jf_version(void);

/**
 * Closed-form Gaussian curvature of the Kepler Jacobi metric `(E + k/r)(dr² + r²dφ²)`.
 */
enum JfStatus jf_kepler_curvature(double k, double energy, double r, double *out_k);

/**
 * The same curvature by finite differences of the conformal factor.
 */
enum JfStatus jf_kepler_curvature_numeric(double k, double energy, double r, double *out_k);

enum JfOrbitClass jf_classify_orbit(double energy);

enum JfStatus jf_eccentricity(double energy,
                              double angular_momentum,
                              double mass,
                              double k,
                              double *out_e);

/**
 * Builds a catalog entry by name from `n` key/value pairs; unset keys take
 * their defaults.
 */
enum JfStatus jf_catalog_new(const char *name,
                             const char *const *keys,
                             const double *values,
                             size_t n,
                             struct JfCatalog **out_handle);

void jf_catalog_free(struct JfCatalog *handle);

/**
 * Spatial dimension, or 0 for NULL.
 */
size_t jf_catalog_dim(const struct JfCatalog *handle);

/**
 * Generic non-relativistic Jacobi metric `2m(E − U) g` at `x`.
 */
enum JfStatus jf_catalog_jacobi_nonrelativistic(const struct JfCatalog *handle,
                                                const double *x,
                                                size_t n,
                                                double energy,
                                                double *out_matrix);

/**
 * Generic relativistic Jacobi metric at energy `ℰ` (or `𝒬` for Euclidean entries).
 */
enum JfStatus jf_catalog_jacobi_relativistic(const struct JfCatalog *handle,
                                             const double *x,
                                             size_t n,
                                             double energy,
                                             double *out_matrix);

/**
 * Closed-form relativistic Jacobi metric of the entry.
 */
enum JfStatus jf_catalog_printed_relativistic(const struct JfCatalog *handle,
                                              const double *x,
                                              size_t n,
                                              double energy,
                                              double *out_matrix);

/**
 * The entry's non-relativistic system at energy `E`.
 */
enum JfStatus jf_catalog_system(const struct JfCatalog *handle,
                                double energy,
                                struct JfSystem **out_system);

/**
 * Planar Kepler system `U = −k/r` in polar coordinates.
 */
enum JfStatus jf_system_kepler(double k, double mass, double energy, struct JfSystem **out_system);

void jf_system_free(struct JfSystem *system);

size_t jf_system_dim(const struct JfSystem *system);

/**
 * Energy of the system, NaN for NULL.
 */
double jf_system_energy(const struct JfSystem *system);

/**
 * Sets `E` to the Hamiltonian at `(x, p)`.
 */
enum JfStatus jf_system_set_energy_from(struct JfSystem *system,
                                        const double *x,
                                        const double *p,
                                        size_t n);

enum JfStatus jf_system_hamiltonian(const struct JfSystem *system,
                                    const double *x,
                                    const double *p,
                                    size_t n,
                                    double *out_h);

/**
 * Conformal factor `2m(E − U)` at `x`.
 */
enum JfStatus jf_system_jacobi_factor(const struct JfSystem *system,
                                      const double *x,
                                      size_t n,
                                      double *out_factor);

/**
 * Hamilton's equations `(dx/dt, dp/dt)`.
 */
enum JfStatus jf_system_hamilton_rhs(const struct JfSystem *system,
                                     const double *x,
                                     const double *p,
                                     size_t n,
                                     double *dx,
                                     double *dp);

/**
 * Jacobi-parameter equations `(dx/ds, dp/ds)`.
 */
enum JfStatus jf_system_jacobi_rhs(const struct JfSystem *system,
                                   const double *x,
                                   const double *p,
                                   size_t n,
                                   double *dx,
                                   double *dp);

/**
 * Integrates from `(x0, p0)` over `span` (time for Hamilton, Jacobi `s`
 * otherwise). `max_step <= 0` leaves the step unbounded. A run that stops
 * early still returns `Ok`; query [`jf_trajectory_termination`].
 */
enum JfStatus jf_integrate(const struct JfSystem *system,
                           enum JfFlowKind kind,
                           enum JfChart chart,
                           const double *x0,
                           const double *p0,
                           size_t n,
                           double span,
                           double rtol,
                           double atol,
                           double max_step,
                           struct JfTrajectory **out_trajectory);

void jf_trajectory_free(struct JfTrajectory *trajectory);

/**
 * Number of recorded states, 0 for NULL.
 */
size_t jf_trajectory_len(const struct JfTrajectory *trajectory);

size_t jf_trajectory_dim(const struct JfTrajectory *trajectory);

enum JfStatus jf_trajectory_termination(const struct JfTrajectory *trajectory,
                                        enum JfTermination *out_termination);

/**
 * Copies state `index`: its parameter, `x` and `p` (each of length `n`).
 */
enum JfStatus jf_trajectory_state(const struct JfTrajectory *trajectory,
                                  size_t index,
                                  double *out_param,
                                  double *out_x,
                                  double *out_p,
                                  size_t n);

/**
 * Named monitor (e.g. `"energy"`, `"H_tilde"`, `"clairaut"`) at state `index`.
 */
enum JfStatus jf_trajectory_monitor(const struct JfTrajectory *trajectory,
                                    size_t index,
                                    const char *name,
                                    double *out_value);

/**
 * Relabels a time-parametrized trajectory by the Jacobi parameter `s`.
 */
enum JfStatus jf_trajectory_to_jacobi(const struct JfTrajectory *trajectory,
                                      const struct JfSystem *system,
                                      struct JfTrajectory **out_trajectory);

/**
 * Largest distance between arc-length-resampled configuration paths. With
 * `polar` set, `(r, φ)` points are compared in Cartesian form.
 */
enum JfStatus jf_compare_paths(const struct JfTrajectory *a,
                               const struct JfTrajectory *b,
                               bool polar,
                               double *out_deviation);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* JACOBI_FLOW_H */
