#ifndef GRADING_LAB_H
#define GRADING_LAB_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Subcommands reachable through [`gl_run_command`].
 */
typedef enum GlCommand {
  GL_COMMAND_VERIFY = 0,
  GL_COMMAND_EVOLVE = 1,
  GL_COMMAND_DECAY = 2,
  GL_COMMAND_BLOCK = 3,
} GlCommand;

/**
 * Result codes.
 */
typedef enum GlStatus {
  GL_STATUS_OK = 0,
  GL_STATUS_NULL_POINTER = 1,
  GL_STATUS_INVALID_ARGUMENT = 2,
  GL_STATUS_DIMENSION_MISMATCH = 3,
  GL_STATUS_INVALID_DIMENSION = 4,
  GL_STATUS_INDEX_OUT_OF_RANGE = 5,
  GL_STATUS_SITE_OUTSIDE_CHAIN = 6,
  GL_STATUS_CAP_EXCEEDED = 7,
  GL_STATUS_NOT_HERMITIAN = 8,
  GL_STATUS_GRID_ERROR = 9,
  GL_STATUS_BLOCK_MISMATCH = 10,
  GL_STATUS_SUPPORT_TOO_LARGE = 11,
  GL_STATUS_NUMERICAL = 12,
  GL_STATUS_CONFIG_ERROR = 13,
  GL_STATUS_PANIC = 14,
} GlStatus;

/**
 * Element of the Weyl algebra (finite sum of phased monomials).
 */
typedef struct GlElement GlElement;

/**
 * Quadratic gauge-invariant model on a finite chain, with its dense realization.
 */
typedef struct GlModel GlModel;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failing call on this thread; empty after a success. The
 * pointer stays valid until the next call into this library from the same thread.
 */
const char *gl_last_error(void);

/**
 * Bare Weyl operator `W_site(k, l)`.
 *
 * # Safety
 * `out` must be a valid pointer to writable storage for one handle.
 */
enum GlStatus gl_element_weyl(uint32_t d,
                              int64_t site,
                              int64_t k,
                              int64_t l,
                              struct GlElement **out);

/**
 * Dressed Weyl operator `W̄_x(0, s)` on a chain of `len` sites.
 *
 * # Safety
 * `out` must be a valid pointer to writable storage for one handle.
 */
enum GlStatus gl_element_dressed_weyl(uint32_t d,
                                      int64_t j_plus,
                                      int64_t j_minus,
                                      size_t len,
                                      int64_t x,
                                      int64_t s,
                                      struct GlElement **out);

/**
 * Dressed matrix unit sending level `s` to level `r` at site `x`.
 *
 * # Safety
 * `out` must be a valid pointer to writable storage for one handle.
 */
enum GlStatus gl_element_dressed_unit(uint32_t d,
                                      int64_t j_plus,
                                      int64_t j_minus,
                                      size_t len,
                                      int64_t x,
                                      uint32_t r,
                                      uint32_t s,
                                      struct GlElement **out);

/**
 * `a · b`.
 *
 * # Safety
 * `a` and `b` must be live handles; `out` must be writable.
 */
enum GlStatus gl_element_mul(const struct GlElement *a,
                             const struct GlElement *b,
                             struct GlElement **out);

/**
 * `a + (re + i·im) · b`.
 *
 * # Safety
 * `a` and `b` must be live handles; `out` must be writable.
 */
enum GlStatus gl_element_add_scaled(const struct GlElement *a,
                                    const struct GlElement *b,
                                    double re,
                                    double im,
                                    struct GlElement **out);

/**
 * `a†`.
 *
 * # Safety
 * `a` must be a live handle; `out` must be writable.
 */
enum GlStatus gl_element_adjoint(const struct GlElement *a, struct GlElement **out);

/**
 * Normalized trace, computed symbolically.
 *
 * # Safety
 * `a` must be a live handle; `re` and `im` must be writable.
 */
enum GlStatus gl_element_trace(const struct GlElement *a, double *re, double *im);

/**
 * Number of monomials with nonzero coefficient.
 *
 * # Safety
 * `a` must be a live handle; `out` must be writable.
 */
enum GlStatus gl_element_term_count(const struct GlElement *a, size_t *out);

/**
 * Largest coefficient modulus, zero for the zero element.
 *
 * # Safety
 * `a` must be a live handle; `out` must be writable.
 */
enum GlStatus gl_element_max_abs_coefficient(const struct GlElement *a, double *out);

/**
 * Operator norm of the dense realization on a chain of `len` sites, refusing
 * Hilbert spaces larger than `cap`.
 *
 * # Safety
 * `a` must be a live handle; `out` must be writable.
 */
enum GlStatus gl_element_op_norm(const struct GlElement *a, size_t len, size_t cap, double *out);

/**
 * Releases an element handle; null is ignored.
 *
 * # Safety
 * `a` must be null or a handle obtained from this library, not yet freed.
 */
void gl_element_free(struct GlElement *a);

/**
 * Exponent `c` with `W̄_x W̄_y = e^{2πic/d} W̄_y W̄_x`.
 *
 * # Safety
 * `out` must be writable.
 */
enum GlStatus gl_exchange_exponent(uint32_t d,
                                   int64_t j_plus,
                                   int64_t j_minus,
                                   size_t len,
                                   int64_t x,
                                   int64_t y,
                                   uint32_t *out);

/**
 * Builds the quadratic model with hopping `h(offsets[i]) = re[i] + i·im[i]`.
 *
 * # Safety
 * `offsets`, `re` and `im` must each point to `count` readable values (or be null
 * with `count == 0`); `out` must be writable.
 */
enum GlStatus gl_model_new(uint32_t d,
                           int64_t j_plus,
                           int64_t j_minus,
                           size_t len,
                           const int64_t *offsets,
                           const double *re,
                           const double *im,
                           size_t count,
                           size_t cap,
                           struct GlModel **out);

/**
 * `‖[H, G]‖` with `G` the global gauge unitary.
 *
 * # Safety
 * `m` must be a live handle; `out` must be writable.
 */
enum GlStatus gl_model_gauge_defect(const struct GlModel *m, double *out);

/**
 * Lieb-Robinson speed used for the light-cone guard.
 *
 * # Safety
 * `m` must be a live handle; `out` must be writable.
 */
enum GlStatus gl_model_light_cone_speed(const struct GlModel *m, double *out);

/**
 * `‖[τ_t(a), b]‖` under the model dynamics.
 *
 * # Safety
 * `m`, `a` and `b` must be live handles; `out` must be writable.
 */
enum GlStatus gl_model_commutator_norm(const struct GlModel *m,
                                       const struct GlElement *a,
                                       const struct GlElement *b,
                                       double t,
                                       double *out);

/**
 * Releases a model handle; null is ignored.
 *
 * # Safety
 * `m` must be null or a handle obtained from this library, not yet freed.
 */
void gl_model_free(struct GlModel *m);

/**
 * Runs a subcommand on a config text (the CLI's `key = value` format) and returns
 * the CSV as a NUL-terminated string to be released with [`gl_string_free`].
 * `failures` receives the number of assertion-tier failures.
 *
 * # Safety
 * `config` must be a NUL-terminated string; `csv` and `failures` must be writable.
 */
enum GlStatus gl_run_command(enum GlCommand command,
                             const char *config,
                             size_t cap,
                             uint64_t seed,
                             char **csv,
                             size_t *failures);

/**
 * Releases a string returned by this library; null is ignored.
 *
 * # Safety
 * `s` must be null or a string obtained from this library, not yet freed.
 */
void gl_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* GRADING_LAB_H */
