#ifndef PARACALC_H
#define PARACALC_H

#include <stdarg.h>
#include <stdbool.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result codes. The nonzero values below 10 match the exit codes of the
 * `paracalc` binary.
 */
typedef enum PcStatus {
  PC_STATUS_OK = 0,
  /**
   * Configuration, input, capability or class error.
   */
  PC_STATUS_CONFIG = 2,
  /**
   * Numerical contract failure.
   */
  PC_STATUS_NUMERICAL = 3,
  /**
   * Hypothesis gate rejected the request.
   */
  PC_STATUS_HYPOTHESIS = 4,
  /**
   * A required pointer argument was null.
   */
  PC_STATUS_NULL_POINTER = 10,
  /**
   * A string argument was not valid UTF-8.
   */
  PC_STATUS_INVALID_UTF8 = 11,
  /**
   * Internal panic; the library state is still usable.
   */
  PC_STATUS_PANIC = 12,
} PcStatus;

/**
 * Complex field sampled on a grid.
 */
typedef struct PcField PcField;

/**
 * Periodic sampling grid.
 */
typedef struct PcGrid PcGrid;

/**
 * Catalogue symbol bound to a grid.
 */
typedef struct PcSymbol PcSymbol;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failing call on this thread, or null. The pointer stays
 * valid until the next failing call on the same thread.
 */
const char *pc_last_error_message(void);

/**
 * Creates a grid of `n_pts` points per axis in dimension 1 or 2. A period
 * `<= 0` selects the default period of the dimension.
 *
 * # Safety
 * `out` must be a valid pointer to writable storage for one handle.
 */
enum PcStatus pc_grid_new(uint32_t dim, uint64_t n_pts, double period, struct PcGrid **out);

/**
 * Total number of samples, `n_pts^dim`; 0 for a null grid.
 *
 * # Safety
 * `grid` must be null or a live grid handle.
 */
uintptr_t pc_grid_len(const struct PcGrid *grid);

/**
 * # Safety
 * `grid` must be null or a handle from [`pc_grid_new`] not yet freed.
 */
void pc_grid_free(struct PcGrid *grid);

/**
 * Max deviation of the Littlewood–Paley partition from 1 on the grid lattice.
 *
 * # Safety
 * `grid` must be a live grid handle and `out` writable.
 */
enum PcStatus pc_partition_deviation(const struct PcGrid *grid, double *out);

/**
 * Builds a field from `len` samples in row-major order. `im` may be null for a
 * real field.
 *
 * # Safety
 * `re` (and `im` when non-null) must point to `len` readable doubles.
 */
enum PcStatus pc_field_from_samples(const struct PcGrid *grid,
                                    const double *re,
                                    const double *im,
                                    uintptr_t len,
                                    struct PcField **out);

/**
 * Copies the samples of `field` into `re` and `im` (either may be null).
 * `len` must equal the grid size.
 *
 * # Safety
 * Non-null `re`/`im` must point to `len` writable doubles.
 */
enum PcStatus pc_field_samples(const struct PcField *field, double *re, double *im, uintptr_t len);

/**
 * # Safety
 * `field` must be null or a live field handle.
 */
void pc_field_free(struct PcField *field);

/**
 * `H^s` norm of a field.
 *
 * # Safety
 * `field` must be a live handle and `out` writable.
 */
enum PcStatus pc_sobolev_norm(const struct PcField *field, double s, double *out);

/**
 * Builds a symbol from a catalogue id such as `japanese:m=1.5` or `dn`.
 *
 * # Safety
 * `id` must be a NUL-terminated string and `out` writable.
 */
enum PcStatus pc_symbol_from_catalogue(const struct PcGrid *grid,
                                       const char *id,
                                       struct PcSymbol **out);

/**
 * # Safety
 * `symbol` must be null or a live symbol handle.
 */
void pc_symbol_free(struct PcSymbol *symbol);

/**
 * Applies `Op(σ)` to `u` with the automatically chosen method. The result is a
 * new field handle.
 *
 * # Safety
 * `symbol` and `u` must be live handles on the same grid; `out` writable.
 */
enum PcStatus pc_op_apply(const struct PcSymbol *symbol,
                          const struct PcField *u,
                          struct PcField **out);

/**
 * Runs one experiment described by a JSON object and returns the report as
 * JSON in `*out`, to be released with [`pc_string_free`]. A report whose pass
 * flag is false still returns `PC_STATUS_OK`.
 *
 * # Safety
 * `config_json` must be a NUL-terminated string and `out` writable.
 */
enum PcStatus pc_experiment_json(const char *config_json, char **out);

/**
 * # Safety
 * `s` must be null or a string returned by this library.
 */
void pc_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* PARACALC_H */
