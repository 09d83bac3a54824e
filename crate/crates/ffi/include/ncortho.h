#ifndef NCORTHO_H
#define NCORTHO_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum NcoStatus {
  NCO_STATUS_OK = 0,
  NCO_STATUS_NULL_POINTER = 1,
  // Malformed, incomplete or inconsistent input.
  NCO_STATUS_INVALID_INPUT = 2,
  // The functional is not strictly positive.
  NCO_STATUS_NOT_POSITIVE = 3,
  // A numerical check failed on well-formed input.
  NCO_STATUS_NUMERICAL = 4,
  // A point is outside the required domain.
  NCO_STATUS_DOMAIN = 5,
  NCO_STATUS_PANIC = 6,
} NcoStatus;

typedef struct NcoBasis NcoBasis;

typedef struct NcoCoeffs NcoCoeffs;

typedef struct NcoFunctional NcoFunctional;

typedef struct NcoJacobi NcoJacobi;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message of the last failed call on this thread, or null. The pointer stays
// valid until the next failing call on the same thread.
const char *nco_last_error_message(void);

// # Safety
// `s` must come from this library and not have been freed.
void nco_string_free(char *s);

// Parses a moment file.
//
// # Safety
// `json` must be a nul-terminated string; `out` must be writable.
enum NcoStatus nco_functional_from_json(const char *json, struct NcoFunctional **out);

// # Safety
// `f` must be a valid handle; `out` must be writable.
enum NcoStatus nco_functional_to_json(const struct NcoFunctional *f, char **out);

// # Safety
// `f` must be null or a handle from this library, freed once.
void nco_functional_free(struct NcoFunctional *f);

// Smallest eigenvalue of the Gram matrix at `level`.
//
// # Safety
// `f` must be a valid handle; `out` must be writable.
enum NcoStatus nco_functional_min_eigenvalue(const struct NcoFunctional *f,
                                             size_t level,
                                             double *out);

// # Safety
// `f` must be a valid handle; `out` must be writable.
enum NcoStatus nco_orthogonalize(const struct NcoFunctional *f,
                                 size_t level,
                                 struct NcoBasis **out);

// `max |A G A* − I|` of `basis` under the Gram matrix of `f`.
//
// # Safety
// Handles must be valid; `out` must be writable.
enum NcoStatus nco_basis_orthonormality_residual(const struct NcoBasis *basis,
                                                 const struct NcoFunctional *f,
                                                 double *out);

// # Safety
// `basis` must be a valid handle; `out` must be writable.
enum NcoStatus nco_basis_to_json(const struct NcoBasis *basis, char **out);

// # Safety
// `b` must be null or a handle from this library, freed once.
void nco_basis_free(struct NcoBasis *b);

// # Safety
// Handles must be valid; `out` must be writable.
enum NcoStatus nco_extract(const struct NcoFunctional *f,
                           const struct NcoBasis *basis,
                           size_t levels,
                           struct NcoCoeffs **out);

// # Safety
// `json` must be a nul-terminated string; `out` must be writable.
enum NcoStatus nco_coeffs_from_json(const char *json, struct NcoCoeffs **out);

// # Safety
// `c` must be a valid handle; `out` must be writable.
enum NcoStatus nco_coeffs_to_json(const struct NcoCoeffs *c, char **out);

// # Safety
// `c` must be null or a handle from this library, freed once.
void nco_coeffs_free(struct NcoCoeffs *c);

// Rebuilds the functional (moments up to degree `2·levels`) and, when
// `out_basis` is non-null, the orthonormal basis.
//
// # Safety
// `c` must be a valid handle; `out_functional` must be writable; `out_basis`
// may be null.
enum NcoStatus nco_favard(const struct NcoCoeffs *c,
                          size_t levels,
                          double cond_bound,
                          struct NcoFunctional **out_functional,
                          struct NcoBasis **out_basis);

// # Safety
// `c` must be a valid handle; `out` must be writable.
enum NcoStatus nco_jacobi_build(const struct NcoCoeffs *c,
                                size_t truncation,
                                struct NcoJacobi **out);

// `<J_σ e_∅, e_∅>` for the word written as in `"1.2.2"` (`"e"` is empty).
// `truncated` is set when the truncation may affect the value.
//
// # Safety
// `j` must be a valid handle; `word` a nul-terminated string; the outputs
// writable.
enum NcoStatus nco_jacobi_moment(const struct NcoJacobi *j,
                                 const char *word,
                                 double *re,
                                 double *im,
                                 bool *truncated);

// # Safety
// `j` must be null or a handle from this library, freed once.
void nco_jacobi_free(struct NcoJacobi *j);

// Writes whether the Hankel data come from a positive functional, and the
// minimum Gram eigenvalue.
//
// # Safety
// `f` must be a valid handle; the outputs writable.
enum NcoStatus nco_hamburger(const struct NcoFunctional *f,
                             size_t level,
                             double tol,
                             bool *yes,
                             double *min_eigenvalue);

// Cayley transform of a point file (ball to Siegel, or back when `inverse`).
//
// # Safety
// `json` must be a nul-terminated string; `out` must be writable.
enum NcoStatus nco_cayley_json(const char *json, bool inverse, char **out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* NCORTHO_H */
