/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#ifndef PATHWISE_H
#define PATHWISE_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status codes.
 */
typedef enum PwStatus {
  PW_STATUS_OK = 0,
  /**
   * Null pointer, bad UTF-8 or an index out of range.
   */
  PW_STATUS_INVALID_ARGUMENT = 1,
  /**
   * A library error; see `pw_last_error_code`.
   */
  PW_STATUS_FAILED = 2,
  /**
   * An experiment ran but at least one requested check did not pass.
   */
  PW_STATUS_CHECK_FAILED = 3,
  /**
   * Output buffer too small.
   */
  PW_STATUS_BUFFER_TOO_SMALL = 4,
  PW_STATUS_PANIC = 5,
} PwStatus;

/**
 * Crossing-time partition ladder of a path.
 */
typedef struct PwLadder PwLadder;

/**
 * Sampled path.
 */
typedef struct PwPath PwPath;

/**
 * Itô rough path.
 */
typedef struct PwRoughPath PwRoughPath;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread ("" if none). Valid until
 * the next failing call on the same thread.
 */
const char *pw_last_error_message(void);

/**
 * Machine-readable code of the last failed call on this thread.
 */
const char *pw_last_error_code(void);

/**
 * Releases a string returned by this library.
 *
 * # Safety
 * `s` must come from this library and not have been freed.
 */
void pw_string_free(char *s);

/**
 * Path from `len` times and `len * dim` row-major values.
 *
 * # Safety
 * `times` and `values` must point to `len` and `len * dim` doubles.
 */
enum PwStatus pw_path_new(const double *times,
                          const double *values,
                          size_t len,
                          size_t dim,
                          struct PwPath **out);

/**
 * Seeded test path: `kind` is "linear", "sinusoid", "random_walk" or
 * "brownian"; `scale` is used by random walks only.
 *
 * # Safety
 * `kind` must be a NUL-terminated string and `out` valid for writes.
 */
enum PwStatus pw_path_generate(const char *kind,
                               uint64_t seed,
                               size_t n_steps,
                               double horizon,
                               size_t dim,
                               double scale,
                               struct PwPath **out);

/**
 * # Safety
 * `path` must be null or a live handle.
 */
void pw_path_free(struct PwPath *path);

/**
 * Number of grid points.
 *
 * # Safety
 * `path` must be a live handle.
 */
size_t pw_path_len(const struct PwPath *path);

/**
 * # Safety
 * `path` must be a live handle.
 */
size_t pw_path_dim(const struct PwPath *path);

/**
 * Exact p-variation norm `(sup sum |S_{t_k,t_{k+1}}|^p)^{1/p}` over grid indices `[s, t]`.
 *
 * # Safety
 * `path` must be a live handle and `out` valid for writes.
 */
enum PwStatus pw_p_variation(const struct PwPath *path, double p, size_t s, size_t t, double *out);

/**
 * Ladder with thresholds `2^-n`, `n = from..=to`. `vector_norm` selects
 * crossings of the Euclidean norm instead of merged per-coordinate ones.
 *
 * # Safety
 * `path` must be a live handle and `out` valid for writes.
 */
enum PwStatus pw_ladder_dyadic(const struct PwPath *path,
                               uint32_t from,
                               uint32_t to,
                               bool vector_norm,
                               struct PwLadder **out);

/**
 * # Safety
 * `ladder` must be null or a live handle.
 */
void pw_ladder_free(struct PwLadder *ladder);

/**
 * # Safety
 * `ladder` must be a live handle.
 */
size_t pw_ladder_num_levels(const struct PwLadder *ladder);

/**
 * Copies the stop indices of `level` (0-based, coarsest first) into `buf`.
 * `*len` is the number of stops on return; with a null or short `buf` the
 * call returns `PW_STATUS_BUFFER_TOO_SMALL`.
 *
 * # Safety
 * `buf` must be null or valid for `cap` writes; `len` valid for writes.
 */
enum PwStatus pw_ladder_stops(const struct PwLadder *ladder,
                              size_t level,
                              size_t *buf,
                              size_t cap,
                              size_t *len);

/**
 * Discrete quadratic variation of coordinate `coord` along `level` at grid
 * index `t`.
 *
 * # Safety
 * Handles must be live and `out` valid for writes.
 */
enum PwStatus pw_discrete_qv(const struct PwPath *path,
                             const struct PwLadder *ladder,
                             size_t level,
                             size_t coord,
                             size_t t,
                             double *out);

/**
 * `t -> int_0^t S^i dS^j` with left points along `level`, written to `buf`
 * (one value per grid point).
 *
 * # Safety
 * Handles must be live and `buf` valid for `cap` writes.
 */
enum PwStatus pw_ito_integral(const struct PwPath *path,
                              const struct PwLadder *ladder,
                              size_t level,
                              size_t i,
                              size_t j,
                              double *buf,
                              size_t cap);

/**
 * Itô rough path from the finest level of `ladder`; `max_report_points = 0`
 * selects the default report-grid bound.
 *
 * # Safety
 * Handles must be live and `out` valid for writes.
 */
enum PwStatus pw_rough_path_build(const struct PwPath *path,
                                  const struct PwLadder *ladder,
                                  double p,
                                  size_t max_report_points,
                                  struct PwRoughPath **out);

/**
 * # Safety
 * `rp` must be null or a live handle.
 */
void pw_rough_path_free(struct PwRoughPath *rp);

/**
 * `A(s,t)` as a row-major d x d matrix for grid indices `s <= t`.
 *
 * # Safety
 * `rp` must be live and `buf` valid for `cap` writes.
 */
enum PwStatus pw_rough_path_area(const struct PwRoughPath *rp,
                                 size_t s,
                                 size_t t,
                                 double *buf,
                                 size_t cap);

/**
 * Largest relative Chen residual found on the report grid.
 *
 * # Safety
 * `rp` must be a live handle.
 */
double pw_rough_path_chen_residual(const struct PwRoughPath *rp);

/**
 * JSON export of the rough path on its report grid; free with
 * `pw_string_free`.
 *
 * # Safety
 * `rp` must be live and `out` valid for writes.
 */
enum PwStatus pw_rough_path_to_json(const struct PwRoughPath *rp, char **out);

/**
 * Runs an experiment (`verb`: generate, integrate, roughpath, verify or
 * study) from a JSON config, writing files into `out_dir`. The summary JSON
 * is returned through `summary` (may be null) and must be freed with
 * `pw_string_free`. Returns `PW_STATUS_CHECK_FAILED` when a requested check
 * did not pass.
 *
 * # Safety
 * Strings must be NUL-terminated; `summary` null or valid for writes.
 */
enum PwStatus pw_run_experiment(const char *config_json,
                                const char *verb,
                                const char *out_dir,
                                char **summary);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* PATHWISE_H */
