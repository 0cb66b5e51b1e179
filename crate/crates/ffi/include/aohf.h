#ifndef AOHF_H
#define AOHF_H

/* Generated by cbindgen from src/lib.rs; do not edit. */

#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>

/**
 * Result of every fallible call.
 */
typedef enum AohfStatus {
  AOHF_STATUS_OK = 0,
  AOHF_STATUS_NULL_POINTER = 1,
  AOHF_STATUS_INVALID_UTF8 = 2,
  AOHF_STATUS_IO = 3,
  AOHF_STATUS_PARSE = 4,
  AOHF_STATUS_INVALID_SYSTEM = 5,
  AOHF_STATUS_INVALID_ARGUMENT = 6,
  AOHF_STATUS_NUMERICAL = 7,
  AOHF_STATUS_UNCONVERGED = 8,
  AOHF_STATUS_BUFFER_TOO_SMALL = 9,
  AOHF_STATUS_PANIC = 10,
} AohfStatus;

typedef enum AohfSolver {
  AOHF_SOLVER_ROOTHAAN = 0,
  AOHF_SOLVER_DENSITY_DESCENT = 1,
} AohfSolver;

/**
 * A finished solver run, converged or not.
 */
typedef struct AohfSolution AohfSolution;

/**
 * A validated spin-orbital system.
 */
typedef struct AohfSystem AohfSystem;

/**
 * Solver settings. Start from [`aohf_options_default`].
 */
typedef struct AohfOptions {
  size_t max_iterations;
  double energy_tolerance;
  double gradient_tolerance;
  /**
   * 0 disables DIIS.
   */
  size_t diis_depth;
  double initial_step;
} AohfOptions;

/**
 * Residuals of the Roothaan-Hall equivalence check.
 */
typedef struct AohfEquivalence {
  double occupied_eigen_residual;
  double occupied_offdiagonal;
  double occupied_span_residual;
  double commutator_residual;
  double density_difference;
  bool passed;
} AohfEquivalence;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static NUL-terminated string.
 */
const char *aohf_version(void);

/**
 * Message of the last failed call on this thread, or null.
 *
 * The pointer stays valid until the next `aohf_` call on the same thread.
 */
const char *aohf_last_error(void);

/**
 * Parses AOINTS text. Spatial input is expanded to spin orbitals.
 *
 * # Safety
 * `text` must be a NUL-terminated string and `out` a valid pointer.
 */
enum AohfStatus aohf_system_from_str(const char *text, struct AohfSystem **out);

/**
 * Reads and parses an AOINTS file.
 *
 * # Safety
 * `path` must be a NUL-terminated string and `out` a valid pointer.
 */
enum AohfStatus aohf_system_from_file(const char *path, struct AohfSystem **out);

/**
 * Seeded random system with `m` spin orbitals and `n` electrons.
 *
 * # Safety
 * `out` must be a valid pointer.
 */
enum AohfStatus aohf_system_random(size_t m,
                                   size_t n,
                                   uint64_t seed,
                                   double overlap,
                                   struct AohfSystem **out);

/**
 * # Safety
 * `system` must come from this library and not be used afterwards. Null is ignored.
 */
void aohf_system_free(struct AohfSystem *system);

/**
 * Number of spin orbitals, or 0 for a null handle.
 *
 * # Safety
 * `system` must be null or a live handle.
 */
size_t aohf_system_size(const struct AohfSystem *system);

/**
 * Number of electrons, or 0 for a null handle.
 *
 * # Safety
 * `system` must be null or a live handle.
 */
size_t aohf_system_electrons(const struct AohfSystem *system);

struct AohfOptions aohf_options_default(void);

/**
 * Runs a solver. An unconverged run still yields a solution with status
 * `Ok`; query [`aohf_solution_converged`].
 *
 * # Safety
 * `system` must be a live handle, `options` null (defaults) or valid, and
 * `out` a valid pointer.
 */
enum AohfStatus aohf_solve(const struct AohfSystem *system,
                           enum AohfSolver solver,
                           const struct AohfOptions *options,
                           struct AohfSolution **out);

/**
 * # Safety
 * `solution` must come from this library and not be used afterwards. Null is ignored.
 */
void aohf_solution_free(struct AohfSolution *solution);

/**
 * Total energy, NaN for a null handle.
 *
 * # Safety
 * `solution` must be null or a live handle.
 */
double aohf_solution_energy(const struct AohfSolution *solution);

/**
 * Final `max |FDS − SDF|`, NaN for a null handle.
 *
 * # Safety
 * `solution` must be null or a live handle.
 */
double aohf_solution_gradient(const struct AohfSolution *solution);

/**
 * # Safety
 * `solution` must be null or a live handle.
 */
bool aohf_solution_converged(const struct AohfSolution *solution);

/**
 * # Safety
 * `solution` must be null or a live handle.
 */
size_t aohf_solution_iterations(const struct AohfSolution *solution);

/**
 * Copies the `M×M` density into `buffer` (row-major). `needed`, if not
 * null, receives `M²` even when the buffer is too small.
 *
 * # Safety
 * `solution` must be a live handle and `buffer` hold `len` doubles.
 */
enum AohfStatus aohf_solution_density(const struct AohfSolution *solution,
                                      double *buffer,
                                      size_t len,
                                      size_t *needed);

/**
 * Copies the `M` orbital energies into `buffer`: occupied first, then
 * virtual, each block in ascending order.
 *
 * # Safety
 * `solution` must be a live handle and `buffer` hold `len` doubles.
 */
enum AohfStatus aohf_solution_orbital_energies(const struct AohfSolution *solution,
                                               double *buffer,
                                               size_t len,
                                               size_t *needed);

/**
 * Checks the Roothaan-Hall equivalence of a converged solution against the
 * system it was solved for. Unconverged solutions give `Unconverged`.
 *
 * # Safety
 * Both handles must be live and `out` a valid pointer.
 */
enum AohfStatus aohf_solution_equivalence(const struct AohfSolution *solution,
                                          const struct AohfSystem *system,
                                          struct AohfEquivalence *out);

/**
 * The run report as JSON. Release the string with [`aohf_string_free`].
 *
 * # Safety
 * `solution` must be a live handle and `out` a valid pointer.
 */
enum AohfStatus aohf_solution_to_json(const struct AohfSolution *solution, char **out);

/**
 * # Safety
 * `s` must come from this library and not be used afterwards. Null is ignored.
 */
void aohf_string_free(char *s);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* AOHF_H */
