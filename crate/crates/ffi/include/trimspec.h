#ifndef TRIMSPEC_H
#define TRIMSPEC_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status codes returned by every fallible function.
 */
typedef enum TsStatus {
  TS_STATUS_OK = 0,
  TS_STATUS_INVALID_ARGUMENT = 1,
  TS_STATUS_EMPTY_DOMAIN = 2,
  TS_STATUS_DOMAIN = 3,
  TS_STATUS_SOLVER = 4,
  TS_STATUS_EVALUATION = 5,
  TS_STATUS_NOT_IMPLEMENTED = 6,
  TS_STATUS_SIZE = 7,
  TS_STATUS_INTERNAL = 8,
  TS_STATUS_NULL_POINTER = 9,
  TS_STATUS_BUFFER_TOO_SMALL = 10,
  TS_STATUS_PANIC = 11,
} TsStatus;

/**
 * Which finite-volume operator to assemble.
 */
typedef enum TsMode {
  /**
   * `H` on every site of the box.
   */
  TS_MODE_FULL = 0,
  /**
   * `H_Γ` on the box sites outside `Γ`.
   */
  TS_MODE_TRIMMED = 1,
  /**
   * `H + t χ_Γ` on every site of the box.
   */
  TS_MODE_PENALIZED = 2,
} TsMode;

/**
 * Opaque assembled operator.
 */
typedef struct TsOperator TsOperator;

/**
 * Opaque trimming pattern `Γ`.
 */
typedef struct TsPattern TsPattern;

/**
 * Opaque potential `V`.
 */
typedef struct TsPotential TsPotential;

/**
 * `V(x)` callback: `x` points at `dim` coordinates.
 */
typedef double (*TsPotentialFn)(const int64_t *x, size_t dim, void *user_data);

/**
 * Lower bound on `κ` and the penalty values attached to it.
 */
typedef struct TsKappa {
  double s0;
  double z;
  double kappa_lb;
  double witness_s;
  double optimal_s;
  double kappa_opt;
} TsKappa;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread, empty after a success.
 * The pointer stays valid until the next call into the library on this thread.
 */
const char *ts_last_error(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *ts_version(void);

/**
 * `K_* = K` for odd `K`, `K + 1` for even `K`.
 *
 * # Safety
 * `out` must be valid for writes.
 */
enum TsStatus ts_k_star(uint64_t k, uint64_t *out);

/**
 * Sublattice pattern `K Z^d`.
 *
 * # Safety
 * `out` must be valid for writes.
 */
enum TsStatus ts_pattern_sublattice(size_t dim, uint64_t k, struct TsPattern **out);

/**
 * `K`-periodic pattern given by `n_sites` representatives in `[0, K)^d`,
 * stored row by row in `sites` (`n_sites * dim` coordinates). `q` is the
 * claimed density constant `Q`.
 *
 * # Safety
 * `sites` must hold `n_sites * dim` values; `out` must be valid for writes.
 */
enum TsStatus ts_pattern_periodic(size_t dim,
                                  uint64_t period,
                                  const int64_t *sites,
                                  size_t n_sites,
                                  uint64_t q,
                                  struct TsPattern **out);

/**
 * Whether `x` (`dim` coordinates) lies in `Γ`.
 *
 * # Safety
 * `pattern` must come from a pattern constructor; `x` must hold the
 * pattern's dimension in coordinates; `out` must be valid for writes.
 */
enum TsStatus ts_pattern_contains(const struct TsPattern *pattern, const int64_t *x, bool *out);

/**
 * Release a pattern. Null is ignored.
 *
 * # Safety
 * `pattern` must be null or come from a pattern constructor, freed once.
 */
void ts_pattern_free(struct TsPattern *pattern);

/**
 * `V = 0`.
 *
 * # Safety
 * `out` must be valid for writes.
 */
enum TsStatus ts_potential_zero(struct TsPotential **out);

/**
 * `K`-periodic potential; `values` lists `K^d` entries lexicographically over `[0, K)^d`.
 *
 * # Safety
 * `values` must hold `n_values` entries; `out` must be valid for writes.
 */
enum TsStatus ts_potential_periodic(size_t dim,
                                    uint64_t period,
                                    const double *values,
                                    size_t n_values,
                                    struct TsPotential **out);

/**
 * Finitely supported potential: `V(sites[i]) = values[i]`, zero elsewhere.
 *
 * # Safety
 * `sites` must hold `n * dim` coordinates and `values` `n` entries;
 * `out` must be valid for writes.
 */
enum TsStatus ts_potential_explicit(size_t dim,
                                    const int64_t *sites,
                                    const double *values,
                                    size_t n,
                                    struct TsPotential **out);

/**
 * Potential given by a C callback. The callback may run concurrently on
 * several threads and must stay valid while the handle or any operator
 * built from it is alive. Non-finite values are reported as evaluation errors.
 *
 * # Safety
 * `f` must be callable with the documented arguments; `out` must be valid for writes.
 */
enum TsStatus ts_potential_callback(TsPotentialFn f, void *user_data, struct TsPotential **out);

/**
 * Release a potential. Null is ignored.
 *
 * # Safety
 * `potential` must be null or come from a potential constructor, freed once.
 */
void ts_potential_free(struct TsPotential *potential);

/**
 * Assemble the operator on the box of side `side` around `center`.
 *
 * `center` may be null for the origin. `potential` may be null for `V = 0`.
 * `pattern` may be null only in full mode. `t` is read in penalized mode.
 *
 * # Safety
 * Non-null pointers must be valid: `center` for `dim` values, handles from
 * their constructors, `out` for writes.
 */
enum TsStatus ts_operator_new(size_t dim,
                              const int64_t *center,
                              double side,
                              bool open,
                              const struct TsPotential *potential,
                              const struct TsPattern *pattern,
                              enum TsMode mode,
                              double t,
                              struct TsOperator **out);

/**
 * Release an operator. Null is ignored.
 *
 * # Safety
 * `op` must be null or come from [`ts_operator_new`], freed once.
 */
void ts_operator_free(struct TsOperator *op);

/**
 * Number of sites in the operator domain.
 *
 * # Safety
 * `op` must come from [`ts_operator_new`]; `out` must be valid for writes.
 */
enum TsStatus ts_operator_size(const struct TsOperator *op, size_t *out);

/**
 * Coordinates of domain site `index`, written to `coords` (`dim` values).
 *
 * # Safety
 * `op` must come from [`ts_operator_new`]; `coords` must hold `len` values.
 */
enum TsStatus ts_operator_site(const struct TsOperator *op,
                               size_t index,
                               int64_t *coords,
                               size_t len);

/**
 * Matrix entry `H[i][j]` in domain indices.
 *
 * # Safety
 * `op` must come from [`ts_operator_new`]; `out` must be valid for writes.
 */
enum TsStatus ts_operator_entry(const struct TsOperator *op, size_t i, size_t j, double *out);

/**
 * Lowest eigenvalue to tolerance `tol`.
 *
 * # Safety
 * `op` must come from [`ts_operator_new`]; `out` must be valid for writes.
 */
enum TsStatus ts_ground_energy(const struct TsOperator *op, double tol, double *out);

/**
 * Strictly positive normalized ground state. `psi` receives `n` values in
 * domain order; `ucp_holds` (may be null) reports the unique-continuation checks.
 *
 * # Safety
 * `op` must come from [`ts_operator_new`]; `psi` must hold `len` values;
 * `energy` must be valid for writes.
 */
enum TsStatus ts_ground_state(const struct TsOperator *op,
                              double tol,
                              double *psi,
                              size_t len,
                              double *energy,
                              bool *ucp_holds);

/**
 * Number of eigenvalues in the closed interval `[a, b]`.
 *
 * # Safety
 * `op` must come from [`ts_operator_new`]; `out` must be valid for writes.
 */
enum TsStatus ts_count_eigs(const struct TsOperator *op, double a, double b, size_t *out);

/**
 * Closed-form lower bound on `E_Γ(H) - E_∅(H)`.
 *
 * # Safety
 * `out` must be valid for writes.
 */
enum TsStatus ts_delta_lower(size_t d, uint64_t k, uint64_t q, double spread, double *out);

/**
 * Lower bound on `E(t) - E_∅(H)` for the penalty `t >= 0`.
 *
 * # Safety
 * `out` must be valid for writes.
 */
enum TsStatus ts_delta_t_lower(size_t d,
                               uint64_t k,
                               uint64_t q,
                               double spread,
                               double t,
                               double *out);

/**
 * Lower bound on `κ(H, Γ, E1)` for `E0 < E1 < E0 + delta_lower`.
 *
 * # Safety
 * `out` must be valid for writes.
 */
enum TsStatus ts_kappa_lower(size_t d,
                             uint64_t k,
                             uint64_t q,
                             double spread,
                             double e0,
                             double e1,
                             struct TsKappa *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* TRIMSPEC_H */
