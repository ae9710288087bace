#ifndef FRACSRC_H
#define FRACSRC_H

/* Generated by cbindgen from src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

#define FRACSRC_OK 0

#define FRACSRC_ERR_VALIDATION 1

#define FRACSRC_ERR_NUMERICAL 2

// The iteration cap was reached; outputs are still written.
#define FRACSRC_NOT_CONVERGED 3

#define FRACSRC_ERR_IO 4

#define FRACSRC_ERR_PANIC 5

// Forward model on `(0,1)^dim` with a sampled temporal factor and an
// observation region.
typedef struct FracsrcProblem FracsrcProblem;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message of the last failure on this thread, or null. The pointer stays
// valid until the next call into this library from the same thread.
const char *fracsrc_last_error_message(void);

// `E_{α,β}(z)` by its power series.
//
// # Safety
// `out` must be null or valid for one write.
int32_t fracsrc_mittag_leffler(double alpha, double beta, double z, double *out);

// L1 weights `d_0 .. d_{steps-1}` into `d_out` (length `steps`) and `b0` into `b0_out`.
//
// # Safety
// `d_out` must be null or valid for `steps` writes, `b0_out` for one.
int32_t fracsrc_l1_weights(double alpha, double tau, size_t steps, double *d_out, double *b0_out);

// Builds a problem handle.
//
// `mu` holds `μ(t_0) .. μ(t_steps)` (length `steps + 1`). The observation
// region is the unit cube minus the box `[lo_k, hi_k]`; pass null for both
// bounds to observe everywhere, otherwise each must hold `dim` values.
//
// # Safety
// Pointers must be null or valid for the stated lengths; `out` receives a
// handle to release with [`fracsrc_problem_free`].
int32_t fracsrc_problem_new(size_t dim,
                            size_t n,
                            size_t steps,
                            double t_final,
                            double alpha,
                            const double *mu,
                            const double *omega_lo,
                            const double *omega_hi,
                            struct FracsrcProblem **out);

// Releases a handle; null is ignored.
//
// # Safety
// `p` must come from [`fracsrc_problem_new`] and not be used afterwards.
void fracsrc_problem_free(struct FracsrcProblem *p);

// Number of mesh nodes; 0 for a null handle.
//
// # Safety
// `p` must be null or a live handle.
size_t fracsrc_problem_dofs(const struct FracsrcProblem *p);

// Number of time steps `M`; 0 for a null handle.
//
// # Safety
// `p` must be null or a live handle.
size_t fracsrc_problem_steps(const struct FracsrcProblem *p);

// Node coordinates in node order, `dim` values per node, into `coords_out`
// (length `dofs * dim`).
//
// # Safety
// `p` must be a live handle and `coords_out` valid for the stated length.
int32_t fracsrc_problem_nodes(const struct FracsrcProblem *p, double *coords_out);

// Solves the forward problem for nodal source `f` (length `dofs`) into
// `traj_out` (length `(steps + 1) * dofs`).
//
// # Safety
// Pointers must be valid for the stated lengths.
int32_t fracsrc_forward(const struct FracsrcProblem *p, const double *f, double *traj_out);

// Power-iteration estimate of the largest eigenvalue of the normal operator.
//
// # Safety
// `p` must be a live handle and `out` valid for one write.
int32_t fracsrc_estimate_norm(const struct FracsrcProblem *p,
                              size_t iters,
                              uint64_t seed,
                              double *out);

// Reconstructs the source from observation data `data` (length
// `(steps + 1) * dofs`) starting at `f0` (length `dofs`). The result goes
// to `f_out` (length `dofs`) and the number of updates to `iterations_out`.
// Returns `FRACSRC_NOT_CONVERGED` if `max_iters` ran out; outputs are still
// written in that case.
//
// # Safety
// Pointers must be valid for the stated lengths.
int32_t fracsrc_reconstruct(const struct FracsrcProblem *p,
                            const double *data,
                            double beta,
                            double l,
                            double eps,
                            size_t max_iters,
                            const double *f0,
                            double *f_out,
                            size_t *iterations_out);

// Runs a registered experiment by id and reports its relative error and
// iteration count. A non-null `seed` overrides the registered seed.
//
// # Safety
// `id` must be a NUL-terminated string; other pointers null or valid.
int32_t fracsrc_run_experiment(const char *id,
                               const uint64_t *seed,
                               double *err_out,
                               size_t *iterations_out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* FRACSRC_H */
