/* Copyright 2026 The mmtot Authors
 * SPDX-License-Identifier: Apache-2.0
 *
 * C interface to the mmtot library: multi-marginal optimal transport on dense
 * d-mode tensors of side n. Modes and indices are zero-based. Tensors are
 * row-major with the first mode varying slowest.
 *
 * Every function returning mmtot_status leaves a thread-local message behind
 * on failure, readable with mmtot_last_error() until the next failing call.
 * Objects returned through out-parameters are owned by the caller and released
 * with the matching *_free function; *_free(NULL) is a no-op.
 */
#ifndef MMTOT_MMTOT_H_
#define MMTOT_MMTOT_H_

#include <stddef.h>

#if defined(_WIN32)
#if defined(MMTOT_BUILDING_LIBRARY)
#define MMTOT_API __declspec(dllexport)
#else
#define MMTOT_API __declspec(dllimport)
#endif
#else
#define MMTOT_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum mmtot_status {
  MMTOT_OK = 0,
  MMTOT_ERR_ARGUMENT = 1,         /* bad shape, index, or option */
  MMTOT_ERR_DEGENERATE_SLICE = 2, /* a slice the algorithm divides by sums to zero */
  MMTOT_ERR_DOMAIN = 3,           /* value outside the mathematical domain */
  MMTOT_ERR_CONTRACT = 4,         /* documented precondition violated */
  MMTOT_ERR_NON_CONVERGENCE = 5,  /* iteration cap reached */
  MMTOT_ERR_CAP_EXCEEDED = 6,     /* problem too large for the exact LP */
  MMTOT_ERR_FORMAT = 7,           /* unreadable or malformed file */
  MMTOT_ERR_INTERNAL = 8
} mmtot_status;

typedef struct mmtot_tensor mmtot_tensor;
typedef struct mmtot_marginals mmtot_marginals;
typedef struct mmtot_scale_result mmtot_scale_result;

MMTOT_API const char* mmtot_version(void);
MMTOT_API const char* mmtot_status_string(mmtot_status status);
/* Message of the most recent failure on this thread ("" if none). */
MMTOT_API const char* mmtot_last_error(void);

/* Tensors ------------------------------------------------------------------ */

/* Copies n^order values from `data`; NULL data gives a zero tensor. */
MMTOT_API mmtot_status mmtot_tensor_create(size_t order, size_t side, const double* data,
                                           mmtot_tensor** out);
MMTOT_API mmtot_status mmtot_tensor_read_json(const char* path, mmtot_tensor** out);
MMTOT_API mmtot_status mmtot_tensor_write_json(const mmtot_tensor* t, const char* path);
MMTOT_API void mmtot_tensor_free(mmtot_tensor* t);
MMTOT_API size_t mmtot_tensor_order(const mmtot_tensor* t);
MMTOT_API size_t mmtot_tensor_side(const mmtot_tensor* t);
MMTOT_API size_t mmtot_tensor_size(const mmtot_tensor* t);
/* Borrowed pointer to the n^order values, valid until the tensor is freed. */
MMTOT_API const double* mmtot_tensor_data(const mmtot_tensor* t);

/* Writes marginal `mode` (n values) into `out`. */
MMTOT_API mmtot_status mmtot_tensor_marginal(const mmtot_tensor* t, size_t mode, double* out);

/* Marginal families ----------------------------------------------------------- */

/* `data` holds `count` vectors of length `side`, back to back. Entries must be
 * positive and all vectors must share one l1 mass. */
MMTOT_API mmtot_status mmtot_marginals_create(size_t count, size_t side, const double* data,
                                              mmtot_marginals** out);
MMTOT_API mmtot_status mmtot_marginals_read_json(const char* path, mmtot_marginals** out);
MMTOT_API void mmtot_marginals_free(mmtot_marginals* p);
MMTOT_API size_t mmtot_marginals_count(const mmtot_marginals* p);
MMTOT_API size_t mmtot_marginals_side(const mmtot_marginals* p);
/* Borrowed pointer to the n entries of vector `index`, or NULL if out of range. */
MMTOT_API const double* mmtot_marginals_vector(const mmtot_marginals* p, size_t index);

/* Exact LP ----------------------------------------------------------------- */

/* Optimal plan and value tau(C, P). `plan` may be NULL. The size cap n^d is
 * read from MMTOT_LP_CAP (default 100000). */
MMTOT_API mmtot_status mmtot_solve_exact(const mmtot_tensor* cost, const mmtot_marginals* p,
                                         double* value, mmtot_tensor** plan);

/* Whether some U in U(P) has exactly the zero pattern of `pattern`. */
MMTOT_API mmtot_status mmtot_scalable(const mmtot_tensor* pattern, const mmtot_marginals* p,
                                      int* scalable, double* min_support_entry);

/* Scaling ------------------------------------------------------------------ */

typedef struct mmtot_scale_options {
  double epsilon;     /* in (0, 1/2) */
  size_t max_iter;    /* 0: four times the theoretical bound */
  int nonnegative;    /* nonzero: support-restricted variant for A >= 0 */
} mmtot_scale_options;

/* On MMTOT_ERR_NON_CONVERGENCE the partial result is still returned in *out. */
MMTOT_API mmtot_status mmtot_scale(const mmtot_tensor* a, const mmtot_marginals* p,
                                   const mmtot_scale_options* options, mmtot_scale_result** out);
MMTOT_API void mmtot_scale_result_free(mmtot_scale_result* r);
/* Borrowed; valid until the result is freed. */
MMTOT_API const mmtot_tensor* mmtot_scale_result_tensor(const mmtot_scale_result* r);
MMTOT_API size_t mmtot_scale_result_k_stop(const mmtot_scale_result* r);
MMTOT_API double mmtot_scale_result_bound(const mmtot_scale_result* r);
MMTOT_API int mmtot_scale_result_converged(const mmtot_scale_result* r);
/* Writes the d*n log-scaling exponents (x_1, ..., x_d) into `out`. */
MMTOT_API mmtot_status mmtot_scale_result_exponents(const mmtot_scale_result* r, double* out);
/* JSON-lines trace: one record per iteration, then a summary record. */
MMTOT_API mmtot_status mmtot_scale_result_write_trace(const mmtot_scale_result* r,
                                                      const char* path);

/* Rounding ------------------------------------------------------------------ */

MMTOT_API mmtot_status mmtot_round(const mmtot_tensor* f, const mmtot_marginals* p,
                                   mmtot_tensor** out);

/* Transport ------------------------------------------------------------------- */

/* Entropic solve: Sinkhorn on exp(-lambda C). value = <C,U> - H(U)/lambda.
 * `transport_cost`, `plan` and `trace_path` may be NULL. */
MMTOT_API mmtot_status mmtot_entropic_tot(const mmtot_tensor* cost, const mmtot_marginals* p,
                                          double lambda, double epsilon, double* value,
                                          double* transport_cost, mmtot_tensor** plan,
                                          const char* trace_path);

/* (f, f + d log n / lambda). */
MMTOT_API mmtot_status mmtot_entropic_bracket(double f_lambda, double lambda, size_t n, size_t d,
                                              double* lower, double* upper);

typedef struct mmtot_certificate {
  double value;           /* <C,B> */
  double lower;           /* value - error_budget, a lower bound on tau */
  double upper;           /* value, an upper bound on tau */
  double error_budget;    /* d log n / lambda + 8 d (max C - min C) epsilon */
  double entropic_value;
  double entropic_lower;
  double entropic_upper;
  double delta;
  double lambda;
  double epsilon;
  size_t k_stop;
  double movement_l1;     /* ||B - F||_1 */
  int exact;              /* constant cost: product plan, no scaling */
} mmtot_certificate;

/* lambda <= 0 or epsilon <= 0 select the defaults 2 d log n / delta and
 * min(1/4, delta / (16 d (max C - min C))). `plan` and `trace_path` may be NULL. */
MMTOT_API mmtot_status mmtot_approx_tot(const mmtot_tensor* cost, const mmtot_marginals* p,
                                        double delta, double lambda, double epsilon,
                                        mmtot_certificate* certificate, mmtot_tensor** plan,
                                        const char* trace_path);

/* Set distances --------------------------------------------------------------- */

typedef struct mmtot_cost_profile {
  int distance_matrix;
  int strict_distance_matrix;
  int bisymmetric_distance_matrix;
  int bisymmetric;
  int weak_bisymmetric;
} mmtot_cost_profile;

MMTOT_API mmtot_status mmtot_cost_profile_of(const mmtot_tensor* cost, mmtot_cost_profile* out);

typedef enum mmtot_lift_mode { MMTOT_LIFT_SUM = 0, MMTOT_LIFT_MATCHING = 1 } mmtot_lift_mode;

/* `ground` is an n x n row-major distance matrix. */
MMTOT_API mmtot_status mmtot_lift_ground_metric(const double* ground, size_t n, size_t order,
                                                mmtot_lift_mode mode, mmtot_tensor** out);

/* Minimum over simultaneous permutations alpha of tau(C, (alpha(P1), alpha(P2))).
 * `left` and `right` each hold d/2 vectors. `delta` <= 0 selects the exact LP;
 * otherwise the approximate solver with that delta. `best_permutation` (d/2
 * entries) and `multiset_equal` may be NULL. */
MMTOT_API mmtot_status mmtot_set_distance(const mmtot_tensor* cost, const mmtot_marginals* left,
                                          const mmtot_marginals* right, double delta,
                                          double* distance, size_t* best_permutation,
                                          int* multiset_equal);

#ifdef __cplusplus
}
#endif

#endif /* MMTOT_MMTOT_H_ */
