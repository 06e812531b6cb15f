#ifndef HARDGRID_H
#define HARDGRID_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum HgStatus {
  HG_STATUS_OK = 0,
  HG_STATUS_NULL_POINTER = 1,
  HG_STATUS_INVALID_ARGUMENT = 2,
  HG_STATUS_TOO_LARGE = 3,
  HG_STATUS_IO = 4,
  HG_STATUS_FAILED = 5,
  HG_STATUS_PANIC = 6,
} HgStatus;

/**
 * A weighted hard-core graph.
 */
typedef struct HgGraph HgGraph;

/**
 * A validated continuous model.
 */
typedef struct HgModel HgModel;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread, or an empty string.
 * The pointer stays valid until the next `hg_` call on the same thread.
 */
const char *hg_last_error_message(void);

/**
 * Library version as a static NUL-terminated string.
 */
const char *hg_version(void);

/**
 * Parses a JSON model configuration.
 *
 * # Safety
 * `json` must be a NUL-terminated string and `out` a valid pointer.
 */
enum HgStatus hg_model_from_json(const char *json, struct HgModel **out);

/**
 * Single-type hard spheres of radius `radius` in `[0, side_length]^dimension`.
 *
 * # Safety
 * `out` must be a valid pointer.
 */
enum HgStatus hg_model_hard_sphere(size_t dimension,
                                   double side_length,
                                   double radius,
                                   double fugacity,
                                   struct HgModel **out);

/**
 * # Safety
 * `model` must come from this library and not have been freed; null is ignored.
 */
void hg_model_free(struct HgModel *model);

/**
 * Builds the hard-core graph on the smallest grid meeting discretization
 * error `eps_d`.
 *
 * # Safety
 * `model` must be a live handle and `out` a valid pointer.
 */
enum HgStatus hg_graph_discretize(const struct HgModel *model, double eps_d, struct HgGraph **out);

/**
 * Reads a graph written by `hardgrid discretize`.
 *
 * # Safety
 * `path` must be a NUL-terminated string and `out` a valid pointer.
 */
enum HgStatus hg_graph_from_file(const char *path, struct HgGraph **out);

/**
 * Graph on `num_vertices` vertices with the given weights and `num_edges`
 * edges stored as consecutive endpoint pairs in `edges`.
 *
 * # Safety
 * `weights` must hold `num_vertices` values, `edges` `2 * num_edges` values
 * (either may be null when its length is zero), and `out` must be valid.
 */
enum HgStatus hg_graph_from_edges(size_t num_vertices,
                                  const double *weights,
                                  size_t num_edges,
                                  const uint32_t *edges,
                                  struct HgGraph **out);

/**
 * Number of vertices, or 0 for a null handle.
 *
 * # Safety
 * `graph` must be a live handle or null.
 */
size_t hg_graph_num_vertices(const struct HgGraph *graph);

/**
 * # Safety
 * `graph` must come from this library and not have been freed; null is ignored.
 */
void hg_graph_free(struct HgGraph *graph);

/**
 * Exact `ln Z` by enumeration (at most 30 vertices).
 *
 * # Safety
 * `graph` must be a live handle and `out` a valid pointer.
 */
enum HgStatus hg_exact_log_z(const struct HgGraph *graph, double *out);

/**
 * Randomized estimate of `ln Z` within `eps_a` with probability 3/4.
 *
 * # Safety
 * `graph` must be a live handle and `out` a valid pointer.
 */
enum HgStatus hg_estimate_mcmc(const struct HgGraph *graph,
                               double eps_a,
                               uint64_t seed,
                               double *out);

/**
 * Deterministic correlation-decay estimate of `ln Z`.
 *
 * # Safety
 * `graph` must be a live handle and `out` a valid pointer.
 */
enum HgStatus hg_estimate_weitz(const struct HgGraph *graph, double eps_a, double *out);

/**
 * `ln Z` of hard rods of radius `radius` on `[0, side_length]`.
 *
 * # Safety
 * `out` must be a valid pointer.
 */
enum HgStatus hg_tonks_log_z(double side_length, double radius, double fugacity, double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* HARDGRID_H */
