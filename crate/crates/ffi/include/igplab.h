#ifndef IGPLAB_H
#define IGPLAB_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum IgplabStatus {
  IGPLAB_STATUS_OK = 0,
  IGPLAB_STATUS_NULL_POINTER = 1,
  IGPLAB_STATUS_INVALID_ARGUMENT = 2,
  IGPLAB_STATUS_INVALID_MATRIX = 3,
  IGPLAB_STATUS_NOT_UNITARY = 4,
  IGPLAB_STATUS_DIMENSION_TOO_SMALL = 5,
  IGPLAB_STATUS_DIMENSION_MISMATCH = 6,
  IGPLAB_STATUS_PURITY_OUT_OF_RANGE = 7,
  IGPLAB_STATUS_NUMERICAL_FAILURE = 8,
  IGPLAB_STATUS_PANIC = 9,
} IgplabStatus;

// Opaque validated unitary.
typedef struct IgplabUnitary IgplabUnitary;

typedef struct IgplabProtocolResult {
  double fidelity;
  double trace_sq;
  double igp_pure_inferred;
  double igp_direct;
  double residual;
} IgplabProtocolResult;

typedef struct IgplabEstimate {
  double mean;
  double stderr;
  uint64_t n;
} IgplabEstimate;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Copy the last error message of this thread into `buf` (NUL-terminated,
// truncated to `len` bytes). Returns the full message length without the
// terminator, or 0 when there is no error.
//
// # Safety
// `buf` must be null or valid for writes of `len` bytes.
size_t igplab_last_error_message(char *buf, size_t len);

// Validate a `dim x dim` matrix given as row-major real and imaginary
// parts and return a unitary handle.
//
// # Safety
// `re` and `im` must be valid for reads of `dim * dim` doubles; `out` must
// be valid for a pointer write.
enum IgplabStatus igplab_unitary_new(size_t dim,
                                     const double *re,
                                     const double *im,
                                     struct IgplabUnitary **out);

// Generalized Pauli-Z `diag(exp(i pi j m / d))`.
//
// # Safety
// `out` must be valid for a pointer write.
enum IgplabStatus igplab_unitary_pauli_z(size_t dim, int64_t m, struct IgplabUnitary **out);

// Haar-random unitary drawn from `seed`.
//
// # Safety
// `out` must be valid for a pointer write.
enum IgplabStatus igplab_unitary_haar(size_t dim, uint64_t seed, struct IgplabUnitary **out);

// Haar-random real orthogonal matrix drawn from `seed`.
//
// # Safety
// `out` must be valid for a pointer write.
enum IgplabStatus igplab_unitary_orthogonal(size_t dim, uint64_t seed, struct IgplabUnitary **out);

// Release a handle. Null is ignored.
//
// # Safety
// `u` must be null or a live handle from this library; it is invalid afterwards.
void igplab_unitary_free(struct IgplabUnitary *u);

// Dimension of the unitary, or 0 for a null handle.
//
// # Safety
// `u` must be null or a live handle.
size_t igplab_unitary_dim(const struct IgplabUnitary *u);

// `|Tr(U^dag U*)|^2`.
//
// # Safety
// `u` must be a live handle and `out` valid for a write.
enum IgplabStatus igplab_trace_sq(const struct IgplabUnitary *u, double *out);

// IGP over real pure states.
//
// # Safety
// `u` must be a live handle and `out` valid for a write.
enum IgplabStatus igplab_igp_pure(const struct IgplabUnitary *u, double *out);

// IGP divided by its maximum, `1 - |Tr(U^dag U*)|^2 / d^2`.
//
// # Safety
// `u` must be a live handle and `out` valid for a write.
enum IgplabStatus igplab_igp_normalized(const struct IgplabUnitary *u, double *out);

// IGP averaged over purity with uniform Bloch radius.
//
// # Safety
// `u` must be a live handle and `out` valid for a write.
enum IgplabStatus igplab_igp_avg_uniform(const struct IgplabUnitary *u, double *out);

// IGP averaged over Hilbert-Schmidt random real states.
//
// # Safety
// `u` must be a live handle and `out` valid for a write.
enum IgplabStatus igplab_igp_avg_hs(const struct IgplabUnitary *u, double *out);

// IGP over real states of purity `purity`.
//
// # Safety
// `u` must be a live handle and `out` valid for a write.
enum IgplabStatus igplab_igp_at_purity(const struct IgplabUnitary *u, double purity, double *out);

// Simulate the fidelity protocol.
//
// # Safety
// `u` must be a live handle and `out` valid for a write.
enum IgplabStatus igplab_protocol_run(const struct IgplabUnitary *u,
                                      struct IgplabProtocolResult *out);

// Haar mean of the IGP at purity `purity`, `(d P - 1) / (2 (d + 1))`.
//
// # Safety
// `out` must be valid for a write.
enum IgplabStatus igplab_haar_mean_igp(size_t dim, double purity, double *out);

// Largest pure-state IGP in dimension `dim`, `d / (2 (d + 2))`.
//
// # Safety
// `out` must be valid for a write.
enum IgplabStatus igplab_igp_max(size_t dim, double *out);

// Monte Carlo Haar mean of the IGP over `n` unitaries split across
// `streams` workers. Deterministic in `(seed, streams)`.
//
// # Safety
// `out` must be valid for a write.
enum IgplabStatus igplab_mc_haar_mean_igp(size_t dim,
                                          double purity,
                                          uint64_t n,
                                          uint64_t seed,
                                          uint32_t streams,
                                          struct IgplabEstimate *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* IGPLAB_H */
