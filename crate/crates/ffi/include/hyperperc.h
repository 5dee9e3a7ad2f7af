#ifndef HYPERPERC_H
#define HYPERPERC_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result codes shared by all functions.
 */
typedef enum HpStatus {
  HP_OK = 0,
  HP_NULL_ARGUMENT = 1,
  HP_INVALID_INPUT = 2,
  HP_CAPACITY = 3,
  HP_NO_ROOT = 4,
  HP_EMBEDDING = 5,
  HP_UNSUPPORTED_MODE = 6,
  HP_IO = 7,
  HP_PANIC = 8,
} HpStatus;

/**
 * A generator graph with terminals.
 */
typedef struct HpGenerator HpGenerator;

/**
 * A periodic hyperlattice.
 */
typedef struct HpLattice HpLattice;

/**
 * Crossing estimate over independent trials.
 */
typedef struct HpCrossingStats {
  uint64_t trials;
  uint64_t hits;
  double estimate;
  double ci95;
  uint64_t seed;
} HpCrossingStats;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failure on this thread (empty after a success). The
 * pointer stays valid until the next library call on the same thread.
 */
const char *hp_last_error(void);

/**
 * Library version as a static string.
 */
const char *hp_version(void);

/**
 * Number of non-crossing partitions of `k` points.
 *
 * # Safety
 * `out` must be a valid pointer.
 */
enum HpStatus hp_nc_count(size_t k, size_t *out);

/**
 * Built-in lattice: `tri`, `tri-dual`, `tri-bond` or `hex-bond`.
 *
 * # Safety
 * `name` must be a NUL-terminated string; `out` a valid pointer.
 */
enum HpStatus hp_lattice_builtin(const char *name, struct HpLattice **out);

/**
 * Lattice from the JSON lattice format.
 *
 * # Safety
 * `json` must be a NUL-terminated string; `out` a valid pointer.
 */
enum HpStatus hp_lattice_from_json(const char *json, struct HpLattice **out);

/**
 * The dual lattice.
 *
 * # Safety
 * `lattice` must come from this library; `out` a valid pointer.
 */
enum HpStatus hp_lattice_dual(const struct HpLattice *lattice, struct HpLattice **out);

/**
 * Vertices and hyperedges per fundamental domain.
 *
 * # Safety
 * `lattice` must come from this library; outputs must be valid pointers.
 */
enum HpStatus hp_lattice_counts(const struct HpLattice *lattice,
                                size_t *vertices,
                                size_t *hyperedges);

/**
 * Releases a lattice. Null is ignored.
 *
 * # Safety
 * `lattice` must come from this library and not be used afterwards.
 */
void hp_lattice_free(struct HpLattice *lattice);

/**
 * Whether the model given by `vectors_json` (one vector or an array by
 * orbit slot) is self-dual on the lattice.
 *
 * # Safety
 * Pointers must be valid; `vectors_json` NUL-terminated.
 */
enum HpStatus hp_lattice_self_dual(const struct HpLattice *lattice,
                                   const char *vectors_json,
                                   bool *out);

/**
 * Horizontal crossing of a square of `size` cells, in an open window with
 * a two-cell margin.
 *
 * # Safety
 * Pointers must be valid; `vectors_json` NUL-terminated.
 */
enum HpStatus hp_estimate_crossing(const struct HpLattice *lattice,
                                   const char *vectors_json,
                                   size_t size,
                                   uint64_t trials,
                                   uint64_t seed,
                                   struct HpCrossingStats *out);

/**
 * Built-in generator: `triangle`, `star` or `bond`, with bond probability `p`.
 *
 * # Safety
 * `name` must be NUL-terminated; `out` a valid pointer.
 */
enum HpStatus hp_generator_builtin(const char *name, struct HpGenerator **out);

/**
 * Generator from the JSON generator format.
 *
 * # Safety
 * `json` must be NUL-terminated; `out` a valid pointer.
 */
enum HpStatus hp_generator_from_json(const char *json, struct HpGenerator **out);

/**
 * Releases a generator. Null is ignored.
 *
 * # Safety
 * `generator` must come from this library and not be used afterwards.
 */
void hp_generator_free(struct HpGenerator *generator);

/**
 * First root in (0, 1) of the generator's self-duality equation.
 * Returns `HP_NO_ROOT` (and leaves `root` untouched) if there is none.
 *
 * # Safety
 * Pointers must be valid.
 */
enum HpStatus hp_generator_critical_point(const struct HpGenerator *generator, double *root);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* HYPERPERC_H */
