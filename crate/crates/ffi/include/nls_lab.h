/* nls_lab C ABI — generated by cbindgen, do not edit. */

#ifndef NLS_LAB_H
#define NLS_LAB_H

/* Regenerate by building the nls-lab-ffi crate. */

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

// Status code returned by every fallible ABI call.
typedef enum NlsStatus {
  NlsStatus_Ok = 0,
  NlsStatus_NullPointer = 1,
  NlsStatus_InvalidArgument = 2,
  NlsStatus_WrongSpace = 3,
  NlsStatus_NonFinite = 4,
  NlsStatus_Blowup = 5,
  NlsStatus_Io = 6,
  NlsStatus_Utf8 = 7,
} NlsStatus;

// Which representation a field handle currently holds.
typedef enum NlsSpace {
  NlsSpace_Physical = 0,
  NlsSpace_Spectral = 1,
} NlsSpace;

// Opaque field handle (one time slice).
typedef struct NlsField NlsField;

// Opaque periodic grid handle.
typedef struct NlsGrid NlsGrid;

// Copies the last error message on this thread into `buf` (NUL
// terminated, truncated to `len`); returns the full message length.
//
// # Safety
// `buf` must point to `len` writable bytes, or be null (query mode).
uintptr_t nls_last_error_message(char *buf, uintptr_t len);

// Builds a periodic grid handle; `out` receives ownership on Ok.
//
// # Safety
// `out` must be a valid pointer to an `*mut NlsGrid` slot.
enum NlsStatus nls_grid_new(uintptr_t dim,
                            uintptr_t points_per_axis,
                            double box_length,
                            struct NlsGrid **out);

// Releases a grid handle. Null is a no-op.
//
// # Safety
// `grid` must be a handle from this ABI, not yet freed.
void nls_grid_free(struct NlsGrid *grid);

// Total number of nodes Nᵈ of the grid.
//
// # Safety
// `grid` must be a live handle.
uintptr_t nls_grid_len(const struct NlsGrid *grid);

// Copies the mathematically ordered per-axis wavenumbers (N entries).
//
// # Safety
// `grid` must be a live handle and `out` point to `len` writable f64s.
enum NlsStatus nls_grid_wavenumbers(const struct NlsGrid *grid, double *out, uintptr_t len);

// Builds a field from interleaved (re, im) values of length 2·Nᵈ.
//
// # Safety
// `grid` must be live; `values` must point to `2 * value_count` f64s;
// `out` must be a valid slot.
enum NlsStatus nls_field_from_values(const struct NlsGrid *grid,
                                     const double *values,
                                     uintptr_t value_count,
                                     enum NlsSpace space,
                                     struct NlsField **out);

// Samples amplitude·exp(-|x-center|²/(2·width²)) on the grid.
//
// # Safety
// `grid` must be live; `center` must point to `dim` f64s or be null
// (origin); `out` must be a valid slot.
enum NlsStatus nls_field_gaussian(const struct NlsGrid *grid,
                                  double amplitude,
                                  double width,
                                  const double *center,
                                  struct NlsField **out);

// Releases a field handle. Null is a no-op.
//
// # Safety
// `field` must be a handle from this ABI, not yet freed.
void nls_field_free(struct NlsField *field);

// Number of complex values stored in the field.
//
// # Safety
// `field` must be a live handle.
uintptr_t nls_field_len(const struct NlsField *field);

// Current representation of the field.
//
// # Safety
// `field` must be a live handle.
enum NlsSpace nls_field_space(const struct NlsField *field);

// Copies interleaved (re, im) values; `len` counts f64 slots (2·Nᵈ).
//
// # Safety
// `field` must be live and `out` point to `len` writable f64s.
enum NlsStatus nls_field_values(const struct NlsField *field, double *out, uintptr_t len);

// Unitary forward transform (physical → spectral).
//
// # Safety
// `field` must be live; `out` must be a valid slot.
enum NlsStatus nls_fft(const struct NlsField *field, struct NlsField **out);

// Unitary inverse transform (spectral → physical).
//
// # Safety
// `field` must be live; `out` must be a valid slot.
enum NlsStatus nls_ifft(const struct NlsField *field, struct NlsField **out);

// Free Schrödinger evolution e^{itΔ} of a physical field.
//
// # Safety
// `field` must be live; `out` must be a valid slot.
enum NlsStatus nls_free_propagate(const struct NlsField *field, double t, struct NlsField **out);

// One full Strang evolution over [0, t_final]; writes the final state.
//
// # Safety
// `field` must be live; `out` must be a valid slot.
enum NlsStatus nls_strang_evolve(const struct NlsField *field,
                                 double lambda,
                                 double p,
                                 double t_final,
                                 double dt,
                                 double blowup_threshold,
                                 struct NlsField **out);

// Discrete Lᵖ norm; pass `p = INFINITY` for the grid maximum.
//
// # Safety
// `field` must be live; `out` must point to a writable f64.
enum NlsStatus nls_lp_norm(const struct NlsField *field, double p, double *out);

// Spectral Sobolev norm of integer order k.
//
// # Safety
// `field` must be live; `out` must point to a writable f64.
enum NlsStatus nls_hk_norm(const struct NlsField *field, uint32_t k, double *out);

// Mass ‖u‖²_{L²}.
//
// # Safety
// `field` must be live; `out` must point to a writable f64.
enum NlsStatus nls_mass(const struct NlsField *field, double *out);

// Energy ∫|∇u|² + (λ/(p+2))∫|u|^{p+2}.
//
// # Safety
// `field` must be live; `out` must point to a writable f64.
enum NlsStatus nls_energy(const struct NlsField *field, double lambda, double p, double *out);

// Writes the field in the NLSF snapshot format.
//
// # Safety
// `field` must be live; `path` a NUL-terminated UTF-8 string.
enum NlsStatus nls_field_write_snapshot(const struct NlsField *field, const char *path);

// Reads a field back from a NLSF snapshot.
//
// # Safety
// `path` must be a NUL-terminated UTF-8 string; `out` a valid slot.
enum NlsStatus nls_field_read_snapshot(const char *path, struct NlsField **out);

#endif  /* NLS_LAB_H */
