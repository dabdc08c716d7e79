#ifndef SYMPRED_H
#define SYMPRED_H

#include <stddef.h>
#include <stdint.h>

#define SYMPRED_METHOD_POD_FULL 0

#define SYMPRED_METHOD_POD_SEPARATE 1

#define SYMPRED_METHOD_PSD_COTANGENT_LIFT 2

#define SYMPRED_METHOD_PSD_COMPLEX_SVD 3

#define SYMPRED_METHOD_POD_OF_YS 4

#define SYMPRED_METHOD_PSD_GREEDY 5

#define SYMPRED_METHOD_PSD_SVD_LIKE 6

#define SYMPRED_FORCING_NONE 0

#define SYMPRED_FORCING_CONSTANT_TIP 1

#define SYMPRED_FORCING_SINUSOIDAL_TIP 2

// Basis kind codes reported by `sympred_basis_kind`.
#define SYMPRED_KIND_ORTHONORMAL_SYMPLECTIC 0

#define SYMPRED_KIND_SYMPLECTIC_NONORTHONORMAL 1

#define SYMPRED_KIND_ORTHONORMAL_NONSYMPLECTIC 2

typedef enum SympredStatus {
  SYMPRED_STATUS_OK = 0,
  SYMPRED_STATUS_NULL_POINTER = 1,
  SYMPRED_STATUS_INVALID_ARGUMENT = 2,
  SYMPRED_STATUS_BUFFER_TOO_SMALL = 3,
  SYMPRED_STATUS_DIMENSION = 4,
  SYMPRED_STATUS_NUMERICAL = 5,
  SYMPRED_STATUS_NO_SPECTRAL_GAP = 6,
  SYMPRED_STATUS_IO = 7,
  SYMPRED_STATUS_PANIC = 8,
} SympredStatus;

// Reduced-order basis.
typedef struct SympredBasis SympredBasis;

// Lattice cantilever model.
typedef struct SympredModel SympredModel;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Copies the last error message of this thread into `buf` (NUL-terminated,
// truncated to `len`) and returns the full message length without the NUL.
// Returns 0 when no error has been recorded.
//
// # Safety
// `buf` must be null or point to `len` writable bytes.
size_t sympred_last_error(char *buf, size_t len);

// Lattice with `nx x ny` cells and default geometry, constants and
// parameter domain.
//
// # Safety
// `out` must be a valid pointer to writable storage for a handle.
enum SympredStatus sympred_model_new(size_t nx, size_t ny, struct SympredModel **out);

// # Safety
// `model` must be null or a handle from `sympred_model_new` not yet freed.
void sympred_model_free(struct SympredModel *model);

// Phase-space dimension `2n`.
//
// # Safety
// `model` must be a live handle and `out` writable.
enum SympredStatus sympred_model_dim(const struct SympredModel *model, size_t *out);

// Nondimensional beam weight, the default load amplitude.
//
// # Safety
// `model` must be a live handle and `out` writable.
enum SympredStatus sympred_model_weight(const struct SympredModel *model, double *out);

// Full-order trajectory from rest on `[0, t_end]` with `nt` samples
// (nondimensional time). Writes `2n x nt` values to `out`.
//
// # Safety
// `model` must be a live handle and `out` must hold `out_len` doubles.
enum SympredStatus sympred_model_solve(const struct SympredModel *model,
                                       double lambda,
                                       double mu,
                                       uint32_t forcing,
                                       double amplitude,
                                       double frequency,
                                       double t_end,
                                       size_t nt,
                                       double *out,
                                       size_t out_len);

// Builds a basis of `size` columns from the `rows x cols` snapshot matrix.
//
// # Safety
// `data` must hold `rows * cols` doubles and `out` must be writable.
enum SympredStatus sympred_basis_generate(uint32_t method,
                                          const double *data,
                                          size_t rows,
                                          size_t cols,
                                          size_t size,
                                          struct SympredBasis **out);

// Wraps caller-provided columns; the kind is inferred from the measures.
//
// # Safety
// `data` must hold `rows * cols` doubles and `out` must be writable.
enum SympredStatus sympred_basis_from_columns(const double *data,
                                              size_t rows,
                                              size_t cols,
                                              struct SympredBasis **out);

// # Safety
// `basis` must be null or a live handle.
void sympred_basis_free(struct SympredBasis *basis);

// # Safety
// `basis` must be a live handle; `rows` and `cols` writable.
enum SympredStatus sympred_basis_dims(const struct SympredBasis *basis, size_t *rows, size_t *cols);

// One of the `SYMPRED_KIND_*` codes.
//
// # Safety
// `basis` must be a live handle and `out` writable.
enum SympredStatus sympred_basis_kind(const struct SympredBasis *basis, uint32_t *out);

// # Safety
// `basis` must be a live handle and `out` must hold `out_len` doubles.
enum SympredStatus sympred_basis_copy(const struct SympredBasis *basis,
                                      double *out,
                                      size_t out_len);

// `||V^T V - I||_F` and `||V^+ V - I||_F`.
//
// # Safety
// `basis` must be a live handle; both outputs writable.
enum SympredStatus sympred_basis_measures(const struct SympredBasis *basis,
                                          double *orthonormality,
                                          double *symplecticity);

// Squared Frobenius projection error of the snapshots: symplectic
// projection for symplectic bases, orthogonal projection otherwise.
//
// # Safety
// `basis` must be a live handle, `data` must hold `rows * cols` doubles.
enum SympredStatus sympred_basis_projection_error(const struct SympredBasis *basis,
                                                  const double *data,
                                                  size_t rows,
                                                  size_t cols,
                                                  double *out);

// Reduced solve from rest on `[0, t_end]` with `nt` samples. Writes the
// lifted states `V x_hat` (`2n x nt`) to `out` and, when `drift` is not
// null, the largest Hamiltonian drift relative to the full solution's
// energy scale.
//
// # Safety
// Handles must be live, `out` must hold `out_len` doubles, `drift` must be
// null or writable.
enum SympredStatus sympred_rom_solve(const struct SympredModel *model,
                                     const struct SympredBasis *basis,
                                     double lambda,
                                     double mu,
                                     uint32_t forcing,
                                     double amplitude,
                                     double frequency,
                                     double t_end,
                                     size_t nt,
                                     double *out,
                                     size_t out_len,
                                     double *drift);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SYMPRED_H */
