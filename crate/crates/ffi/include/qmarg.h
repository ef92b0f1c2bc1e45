/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#ifndef QMARG_H
#define QMARG_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum QmargStatus {
  QMARG_STATUS_OK = 0,
  QMARG_STATUS_NULL_POINTER = 1,
  QMARG_STATUS_INVALID_ARGUMENT = 2,
  QMARG_STATUS_PARSE = 3,
  QMARG_STATUS_DEGENERATE = 4,
  QMARG_STATUS_NO_CONVERGENCE = 5,
  QMARG_STATUS_BUFFER_TOO_SMALL = 6,
  QMARG_STATUS_IO = 7,
  QMARG_STATUS_PANIC = 8,
} QmargStatus;

// Generalized Pauli constraints of one (N, d) setting.
typedef struct QmargCatalog QmargCatalog;

// An N-fermion pure state over d orbitals.
typedef struct QmargState QmargState;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message of the last failing call on this thread; empty if none. The
// pointer stays valid until the next failing call on this thread.
const char *qmarg_last_error(void);

// Library version as a static NUL-terminated string.
const char *qmarg_version(void);

// Parses a JSON state document.
//
// # Safety
// `json` must be a NUL-terminated string and `out` a writable pointer.
enum QmargStatus qmarg_state_from_json(const char *json, struct QmargState **out);

// Builds a state from `len` = C(d, n) unit-norm amplitudes in basis order.
//
// # Safety
// `re` and `im` must point to `len` doubles and `out` must be writable.
enum QmargStatus qmarg_state_from_amplitudes(size_t n,
                                             size_t d,
                                             const double *re,
                                             const double *im,
                                             size_t len,
                                             struct QmargState **out);

// # Safety
// `state` must be null or a handle from a `qmarg_state_*` constructor,
// not freed before.
void qmarg_state_free(struct QmargState *state);

// # Safety
// `state` must be a live handle; `n` and `d` must be writable.
enum QmargStatus qmarg_state_dims(const struct QmargState *state, size_t *n, size_t *d);

// Writes the d natural occupation numbers, decreasing, into `out`.
//
// # Safety
// `state` must be a live handle and `out` must hold `len` doubles.
enum QmargStatus qmarg_state_occupations(const struct QmargState *state, double *out, size_t len);

// # Safety
// `out` must be writable.
enum QmargStatus qmarg_catalog_new(size_t n, size_t d, struct QmargCatalog **out);

// # Safety
// `cat` must be null or a live handle from `qmarg_catalog_new`.
void qmarg_catalog_free(struct QmargCatalog *cat);

// Number of constraints, or 0 for a null handle.
//
// # Safety
// `cat` must be null or a live handle.
size_t qmarg_catalog_len(const struct QmargCatalog *cat);

// Value of the constraint `label` at the occupation vector `lambda`.
//
// # Safety
// `cat` must be a live handle, `label` NUL-terminated, `lambda` must hold
// `len` doubles and `value` must be writable.
enum QmargStatus qmarg_catalog_evaluate(const struct QmargCatalog *cat,
                                        const char *label,
                                        const double *lambda,
                                        size_t len,
                                        double *value);

// Smallest inequality value D over the catalog; `pinned` is set to 1 when
// some inequality is saturated within `pin_tol`.
//
// # Safety
// `cat` must be a live handle, `lambda` must hold `len` doubles, and `d`
// and `pinned` must be writable.
enum QmargStatus qmarg_min_inequality(const struct QmargCatalog *cat,
                                      const double *lambda,
                                      size_t len,
                                      double pin_tol,
                                      double *d,
                                      int32_t *pinned);

// Borland-Dennis value D(kappa) for three-fermion harmonium over
// `basis` Hermite functions, with its rounding-error estimate.
// `floor` is set to 1 when D is not resolved above that estimate.
//
// # Safety
// `d`, `error` and `floor` must be writable.
enum QmargStatus qmarg_harmonium_d(double kappa,
                                   size_t basis,
                                   double *d,
                                   double *error,
                                   int32_t *floor);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* QMARG_H */
