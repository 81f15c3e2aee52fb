#ifndef SCA_NOISE_H
#define SCA_NOISE_H

/* Generated by cbindgen from the sca-noise-ffi sources. Do not edit. */

#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>

// Result of a call.
typedef enum ScaStatus {
  SCA_STATUS_OK = 0,
  SCA_STATUS_NULL_POINTER = 1,
  SCA_STATUS_INVALID_ARGUMENT = 2,
  SCA_STATUS_UNKNOWN_SOLVER = 3,
  SCA_STATUS_UNKNOWN_MODEL = 4,
  // A solver or integral did not converge, or the instance is not convex.
  SCA_STATUS_NUMERIC = 5,
  // A file could not be read or parsed.
  SCA_STATUS_INPUT = 6,
  SCA_STATUS_BUFFER_TOO_SMALL = 7,
  SCA_STATUS_PANIC = 8,
} ScaStatus;

// Artificial noise per point, with the dual level of the solve.
typedef struct ScaAllocation ScaAllocation;

// A set of leakage points with their signal power and physical noise.
typedef struct ScaChannels ScaChannels;

// An input model for the leaked symbol.
typedef struct ScaModel ScaModel;

// Aggregate leakage of an allocation, in nats.
typedef struct ScaLeakage {
  double total_mi;
  double max_mi;
  double average_mi;
  // Fano lower bound on the error probability of a 256-ary key guess.
  double fano_pe_lower;
} ScaLeakage;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message of the last failed call on this thread, or NULL. The pointer stays
// valid until the next failing call on the same thread.
const char *sca_last_error_message(void);

// Library version as a static NUL-terminated string.
const char *sca_version(void);

// Builds a channel set from `len` powers and physical noise variances.
//
// # Safety
// `power` and `noise` must each point to `len` readable doubles, and `out`
// to a writable handle slot.
enum ScaStatus sca_channels_new(const double *power,
                                const double *noise,
                                size_t len,
                                struct ScaChannels **out);

// Reads a channel set from an `index,P,Z` CSV file.
//
// # Safety
// `path` must be a NUL-terminated string and `out` a writable handle slot.
enum ScaStatus sca_channels_load(const char *path, struct ScaChannels **out);

// Number of points in the set; 0 for NULL.
//
// # Safety
// `channels` must be NULL or a live handle.
size_t sca_channels_len(const struct ScaChannels *channels);

// # Safety
// `channels` must be NULL or a handle not yet freed.
void sca_channels_free(struct ScaChannels *channels);

// Builds an input model by name: `gaussian`, `binary`, `exponential`, or
// `tabulated` with `table_path` naming an `rho,mmse` CSV. `table_path` is
// ignored by the other models and may be NULL.
//
// # Safety
// `name` must be a NUL-terminated string, `table_path` NULL or one, and
// `out` a writable handle slot.
enum ScaStatus sca_model_new(const char *name, const char *table_path, struct ScaModel **out);

// # Safety
// `model` must be NULL or a handle not yet freed.
void sca_model_free(struct ScaModel *model);

// MMSE of estimating the symbol at SNR `rho`.
//
// # Safety
// `model` must be a live handle and `out` a writable double.
enum ScaStatus sca_mmse(const struct ScaModel *model, double rho, double *out);

// Mutual information `I(rho)` in nats.
//
// # Safety
// `model` must be a live handle and `out` a writable double.
enum ScaStatus sca_mutual_info(const struct ScaModel *model, double rho, double *out);

// Smallest SNR in `[rho_lo, rho_hi]` past which the model fails the
// convexity certificate. Writes 0 to `found` and leaves `out` alone when the
// whole range is certified.
//
// # Safety
// `model` must be a live handle; `out` and `found` must be writable.
enum ScaStatus sca_convexity_boundary(const struct ScaModel *model,
                                      double rho_lo,
                                      double rho_hi,
                                      double *out,
                                      bool *found);

// Spends `budget` of artificial noise with the named solver: `uniform`,
// `gaussian_total`, `sibson` (needs `alpha`), `minimax` or `arbitrary`.
// `alpha` is ignored by the other solvers. `model` is only read by
// `arbitrary`; NULL means the Gaussian model.
//
// # Safety
// `channels` must be a live handle, `model` NULL or a live handle, `solver`
// a NUL-terminated string and `out` a writable handle slot.
enum ScaStatus sca_allocate(const struct ScaChannels *channels,
                            const struct ScaModel *model,
                            const char *solver,
                            double alpha,
                            double budget,
                            struct ScaAllocation **out);

// Number of points in the allocation; 0 for NULL.
//
// # Safety
// `alloc` must be NULL or a live handle.
size_t sca_allocation_len(const struct ScaAllocation *alloc);

// Copies the noise variances into `buf`, which holds `cap` doubles.
//
// # Safety
// `alloc` must be a live handle and `buf` must hold `cap` writable doubles.
enum ScaStatus sca_allocation_noise(const struct ScaAllocation *alloc, double *buf, size_t cap);

// Dual level of the solve; NaN for NULL.
//
// # Safety
// `alloc` must be NULL or a live handle.
double sca_allocation_dual(const struct ScaAllocation *alloc);

// True when the solve is only known to be stationary, not optimal.
//
// # Safety
// `alloc` must be NULL or a live handle.
bool sca_allocation_stationary_only(const struct ScaAllocation *alloc);

// # Safety
// `alloc` must be NULL or a handle not yet freed.
void sca_allocation_free(struct ScaAllocation *alloc);

// Leakage left by `alloc` on `channels` under `model`.
//
// # Safety
// `channels`, `alloc` and `model` must be live handles and `out` writable.
enum ScaStatus sca_evaluate(const struct ScaChannels *channels,
                            const struct ScaAllocation *alloc,
                            const struct ScaModel *model,
                            struct ScaLeakage *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SCA_NOISE_H */
