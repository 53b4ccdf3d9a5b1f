#ifndef RACE_RACE_H
#define RACE_RACE_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define RACE_API __declspec(dllexport)
#else
#define RACE_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum {
  RACE_OK = 0,
  RACE_ERR_DOMAIN = 1,
  RACE_ERR_PARSE = 2,
  RACE_ERR_VALIDATION = 3,
  RACE_ERR_GUARD = 4,
  RACE_ERR_NUMERIC = 5,
  RACE_ERR_IO = 6,
  RACE_ERR_ARG = 7, /* null pointer or undersized buffer */
  RACE_ERR_INTERNAL = 8
} race_status;

/* Message for the last failing call on this thread; "" after success. */
RACE_API const char* race_last_error(void);
RACE_API const char* race_status_name(race_status status);
RACE_API const char* race_version(void);

/* Strings returned by the library are released with race_string_free. */
RACE_API void race_string_free(char* s);

/* ---- Dirichlet characters ---------------------------------------------- */

typedef struct race_characters race_characters;

RACE_API race_status race_characters_create(uint64_t q, race_characters** out);
RACE_API void race_characters_free(race_characters* table);
RACE_API uint64_t race_characters_modulus(const race_characters* table);
RACE_API uint64_t race_characters_count(const race_characters* table);
/* Conrey indices in increasing order; *count receives phi(q). */
RACE_API race_status race_characters_indices(const race_characters* table, uint64_t* out,
                                             size_t capacity, size_t* count);
RACE_API race_status race_character_value(const race_characters* table, uint64_t conrey_index,
                                          int64_t a, double* re, double* im);

/* ---- Zero data ---------------------------------------------------------- */

typedef struct race_zeros race_zeros;

RACE_API race_status race_zeros_load(const char* path, race_zeros** out);
RACE_API race_status race_zeros_parse(const char* text, race_zeros** out);
RACE_API race_status race_zeros_synthesize(uint64_t q, uint64_t count_per_char, uint64_t seed,
                                           race_zeros** out);
RACE_API void race_zeros_free(race_zeros* zs);
RACE_API uint64_t race_zeros_modulus(const race_zeros* zs);
RACE_API size_t race_zeros_block_count(const race_zeros* zs);
RACE_API size_t race_zeros_total(const race_zeros* zs);
RACE_API double race_zeros_height(const race_zeros* zs);
RACE_API int race_zeros_is_synthetic(const race_zeros* zs);
RACE_API int race_zeros_is_complete(const race_zeros* zs);
RACE_API race_status race_zeros_serialize(const race_zeros* zs, char** out);

/* ---- Covariance --------------------------------------------------------- */

RACE_API race_status race_cq_shift(uint64_t q, int64_t a, int* out);
RACE_API race_status race_var_q(const race_zeros* zs, double* out);
RACE_API race_status race_bq(const race_zeros* zs, int64_t a, int64_t b, double* out);
RACE_API race_status race_lambda_term(uint64_t q, int64_t a, int64_t b, double* out);
RACE_API race_status race_m1_sum(uint64_t q, int64_t a, int64_t d, int allow_large, double* out);
RACE_API race_status race_m2_sum(uint64_t q, int64_t a, int64_t d, int allow_large, double* out);

typedef struct race_corr race_corr;

RACE_API race_status race_corr_from_zeros(const race_zeros* zs, const int64_t* residues, size_t n,
                                          race_corr** out);
/* Row-major n x n; unit diagonal, symmetric, entries in [-1, 1]. */
RACE_API race_status race_corr_from_matrix(const double* entries, size_t n, race_corr** out);
RACE_API void race_corr_free(race_corr* r);
RACE_API size_t race_corr_size(const race_corr* r);
RACE_API double race_corr_var_q(const race_corr* r);
RACE_API int race_corr_is_partial(const race_corr* r);
RACE_API race_status race_corr_entries(const race_corr* r, double* out, size_t capacity);
/* Smallest eigenvalue of the matrix. */
RACE_API race_status race_corr_min_eigenvalue(const race_corr* r, double* out);

typedef struct {
  double sum;
  double paper_form;
  double ratio;
} race_pair_report;

/* Σ|r_ij| over i in I, j in J, i != j against √(|I||J|)log²(2|I||J|)/log q. */
RACE_API race_status race_corr_average(const race_corr* r, const size_t* I, size_t ni,
                                       const size_t* J, size_t nj, double log_q,
                                       race_pair_report* out);

/* ---- Events ------------------------------------------------------------- */

typedef enum { RACE_EVENT_FULL = 0, RACE_EVENT_LEADER = 1, RACE_EVENT_FIRSTK = 2 } race_event_kind;

/* Validates "full:i1,..,in", "leader:i" or "firstk:k" (1-based) for tuples of
   length n and reports its kind, ordered places k and 1/n!, 1/n or (n-k)!/n!. */
RACE_API race_status race_event_info(const char* spec, size_t n, race_event_kind* kind, size_t* k,
                                     double* prediction);

/* ---- Monte Carlo -------------------------------------------------------- */

typedef struct race_sampler race_sampler;

RACE_API race_status race_sampler_z(const race_corr* r, race_sampler** out);
RACE_API race_status race_sampler_x(const race_zeros* zs, const int64_t* residues, size_t n,
                                    int include_shifts, race_sampler** out);
RACE_API void race_sampler_free(race_sampler* s);
RACE_API size_t race_sampler_dim(const race_sampler* s);
/* Diagonal jitter the Cholesky factorization needed (0 for X samplers). */
RACE_API double race_sampler_jitter(const race_sampler* s);
/* count consecutive vectors from stream (seed, stream), row-major into out. */
RACE_API race_status race_sampler_draw(const race_sampler* s, uint64_t seed, uint64_t stream,
                                       size_t count, double* out);

typedef struct {
  uint64_t samples;    /* at least 1000 */
  uint64_t seed;
  unsigned workers;    /* results do not depend on this */
  uint64_t chunk_size; /* 0 selects the default 65536 */
} race_mc_options;

typedef struct {
  double value;
  double std_error;
  uint64_t samples;
  uint64_t count;
  uint64_t ties;
  double prediction;
} race_estimate;

/* Estimates every event on the same sample stream; out has n_events slots. */
RACE_API race_status race_mc_estimate(const race_sampler* s, const char* const* events,
                                      size_t n_events, const race_mc_options* options,
                                      race_estimate* out);

/* ---- Sieve -------------------------------------------------------------- */

typedef void (*race_prime_callback)(uint64_t p, const int64_t* counts, size_t n, uint64_t total,
                                    void* user);

/* Limits above 10^9 need allow_large or RACE_GUARD_OVERRIDE=1. */
RACE_API race_status race_sieve_stream(uint64_t q, const int64_t* residues, size_t n,
                                       uint64_t limit, unsigned workers, int allow_large,
                                       race_prime_callback callback, void* user);
RACE_API race_status race_sieve_counts(uint64_t q, const int64_t* residues, size_t n,
                                       uint64_t limit, unsigned workers, int64_t* counts,
                                       uint64_t* total);
RACE_API race_status race_error_vector(uint64_t q, const int64_t* counts, size_t n,
                                       uint64_t total, double x, double* out);

typedef struct {
  double measure;
  double density;      /* measure/(log X - log 2) */
  double density_logx; /* measure/log X */
  double tie_measure;
  double any_tie_measure;
  uint64_t boundary_count;
} race_log_density;

RACE_API race_status race_exact_log_density(uint64_t q, const int64_t* residues, size_t n,
                                            const char* const* events, size_t n_events,
                                            uint64_t limit, unsigned workers, int allow_large,
                                            race_log_density* out);

/* ---- Analytics ---------------------------------------------------------- */

RACE_API double race_phi_cdf(double x);
RACE_API double race_log_phi_cdf(double x);
RACE_API race_status race_phi_power_integral(uint64_t n, double a, double* out);
RACE_API race_status race_phi_power_integral_quadrature(uint64_t n, double a, double* out);
RACE_API race_status race_ncr2_conditional_integral(uint64_t n, double epsilon, double a,
                                                    double* out);
RACE_API race_status race_leader_conditional_product(const double* r1, size_t m, double x,
                                                     double* out);
RACE_API race_status race_gaussian_density(const double* c, size_t n, const double* x,
                                           int log_scale, double* out);

typedef struct {
  double epsilon;
  double det_exact;
  double det_bound_ratio;
  double max_inv_offdiag_ratio;
  double lu_residual; /* max |inv·A - I| */
} race_near_identity_report;

/* inverse and ratios are optional row-major n x n outputs. */
RACE_API race_status race_near_identity(const double* a, size_t n, race_near_identity_report* out,
                                        double* inverse, double* ratios);

/* u: (n-k) x k, v_var, w: n-k, residual: (n-k) x (n-k); all row-major. */
RACE_API race_status race_firstk_transform(const double* r, size_t n, size_t k, const double* x,
                                           double* u, double* v_var, double* w, double* residual);

typedef struct {
  double value;
  double absolute; /* value times the symmetric prediction for relative kinds */
  double constant_c;
  int shape_only;
} race_bound;

/* kind: probleader, fullrace, leader, firstk, ncr2, lishao or hybrid. The
   matrices (row-major n x n) and u are used by lishao and hybrid only. */
RACE_API race_status race_bound_value(const char* kind, const char* const* keys,
                                      const double* values, size_t n_params,
                                      const double* x_corr, const double* w_corr,
                                      const double* u, size_t n, double constant_c,
                                      race_bound* out);

RACE_API race_status race_delta2_quadrature(double r12, uint64_t n, double* out);
RACE_API race_status race_biased_tuple(uint64_t q, uint64_t k, uint64_t n, uint64_t* out);
RACE_API race_status race_choose_A(double n, double k, double* out);

/* ---- Harmonic ----------------------------------------------------------- */

RACE_API race_status race_g_function(double theta, uint64_t Q, double x, double* out);
RACE_API race_status race_pair_sum(const double* thetas, size_t R, const double* phis, size_t S,
                                   uint64_t Q, double x, race_pair_report* out);

#ifdef __cplusplus
}
#endif

#endif
