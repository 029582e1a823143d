/* patchlam — growth rates of time-periodic patch models.
 *
 * C API of the shared library. All objects are opaque handles; every
 * function returns a pl_status and writes results through out-parameters.
 * On failure, pl_last_error() returns a thread-local description of what
 * went wrong. Strings returned through char** are heap-allocated and must
 * be released with pl_string_free().
 */

#ifndef PATCHLAM_H
#define PATCHLAM_H

#include <stddef.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum pl_status {
    PL_OK = 0,
    PL_ERROR_PARSE = 2,       /* model file / JSON / validation failure */
    PL_ERROR_HYPOTHESIS = 3,  /* a required hypothesis fails (e.g. reducible migration) */
    PL_ERROR_NUMERIC = 5,     /* solver failure or overflow */
    PL_ERROR_ARGUMENT = 6,    /* invalid argument */
    PL_ERROR_NOT_FOUND = 7,   /* unknown catalog entry or parameter */
    PL_ERROR_INTERNAL = 8
} pl_status;

typedef enum pl_verdict {
    PL_VERIFIED_SAMPLED = 0,
    PL_VIOLATED = 1,
    PL_INCONCLUSIVE = 2
} pl_verdict;

typedef enum pl_feasibility {
    PL_THEORY_CERTAIN = 0,
    PL_FOUND_NUMERICALLY = 1,
    PL_IMPOSSIBLE = 2,
    PL_UNDETERMINED = 3
} pl_feasibility;

typedef struct pl_model pl_model;

const char* pl_version(void);

/* Thread-local message describing the most recent failure. */
const char* pl_last_error(void);

void pl_string_free(char* s);

/* ---- models ------------------------------------------------------------ */

pl_status pl_model_load_file(const char* path, pl_model** out);
pl_status pl_model_load_string(const char* json_text, pl_model** out);
void pl_model_free(pl_model* model);

int pl_model_patch_count(const pl_model* model);

/* Serializes the model back to its JSON file form. */
pl_status pl_model_to_json(const pl_model* model, char** out_json);

/* ---- built-in catalog --------------------------------------------------- */

size_t pl_catalog_count(void);
const char* pl_catalog_name(size_t index);
const char* pl_catalog_summary(size_t index);

/* Parameters of a catalog entry (for discovery / help output). */
size_t pl_catalog_param_count(const char* name);
pl_status pl_catalog_param(const char* name, size_t index, const char** out_param_name,
                           double* out_default_value);

/* Builds a catalog model; param_names/param_values may be NULL when
 * param_count is 0 (defaults are used). */
pl_status pl_model_from_catalog(const char* name, const char* const* param_names,
                                const double* param_values, size_t param_count, pl_model** out);

/* ---- evaluation --------------------------------------------------------- */

typedef struct pl_growth_result {
    double lambda;    /* growth rate */
    double mu;        /* Perron root of the monodromy matrix (exp overflow => inf) */
    double log_mu;    /* always finite: ln mu */
    int decoupled;    /* m == 0: lambda is max_i of the mean growth rates */
    int eventually_positive; /* X(T)^n strictly positive (reported, not enforced) */
    double sigma;     /* lower bound */
    double chi;       /* upper bound */
} pl_growth_result;

/* pi_out, when non-NULL, receives the simplex-normalized dominant
 * eigenvector and must have room for patch_count doubles. */
pl_status pl_growth_rate(const pl_model* model, double m, double T, pl_growth_result* out,
                         double* pi_out);

typedef struct pl_limit_result {
    double sigma, chi;
    double lambda_0T;      /* m -> 0 */
    double lambda_m0;      /* T -> 0 at the given m */
    double lambda_mInf;    /* T -> inf; meaningful iff has_mInf */
    double lambda_infT;    /* m -> inf; meaningful iff has_infT */
    double lambda_00, lambda_0inf, lambda_inf0;
    int has_mInf, has_infT, has_0inf;
    int mInf_forced, infT_forced, zeroInf_forced; /* value computed despite unverified hypothesis */
    pl_verdict h3, h4;
} pl_limit_result;

/* force != 0 evaluates the hypothesis-gated formulas even when the checker
 * does not verify the hypothesis (the *_forced flags are then set).
 * report_text, when non-NULL, receives the rendered table. */
pl_status pl_limits(const pl_model* model, double m, int force, pl_limit_result* out,
                    char** report_text);

/* ---- hypothesis checks --------------------------------------------------- */

typedef struct pl_check_options {
    int samples_per_segment;  /* <= 0 for the default (33) */
    int perturbations;        /* <= 0 for the default (16) */
    double radius;            /* <= 0 for the default (1e-3) */
    unsigned long long seed;  /* 0 for the default (1729) */
    double convergence_tol;   /* <= 0 for the default (1e-6) */
    double stability_tol;     /* <= 0 for the default (1e-9) */
} pl_check_options;

typedef struct pl_check_result {
    pl_verdict verdict;
    size_t witness_count;
} pl_check_result;

/* hypothesis: 2, 3 or 4. m is used by H3 only. options may be NULL. */
pl_status pl_check(const pl_model* model, int hypothesis, double m,
                   const pl_check_options* options, pl_check_result* out, char** report_text);

/* ---- sweeps and trajectories --------------------------------------------- */

/* CSV with header m,T,lambda,mu,decoupled in grid-major order (m outer).
 * jobs <= 0 uses the PATCHLAM_JOBS environment variable, else 1. */
pl_status pl_sweep_csv(const pl_model* model, const double* m_values, size_t m_count,
                       const double* T_values, size_t T_count, int jobs, char** out_csv);

/* CSV with header t,x1..xn,log_norm, one row per period; the x columns are
 * the population proportions and log_norm is ln of the total population, so
 * x_i * exp(log_norm) recovers the raw abundances. */
pl_status pl_trajectory_csv(const pl_model* model, double m, double T, const double* x0,
                            size_t x0_len, int periods, char** out_csv);

/* ---- sink/source classification and DIG / DID ---------------------------- */

/* labels_out: -1 sink, 0 neutral, +1 source. Arrays must hold patch_count
 * entries; any of the outputs may be NULL. */
pl_status pl_classify(const pl_model* model, double* rbar_out, int* labels_out, double* sigma_out,
                      double* chi_out);

typedef struct pl_phenomenon_result {
    pl_feasibility feasible;
    int has_witness;
    double witness_m, witness_T, witness_lambda;
    int definition_holds;  /* all sinks (DIG) / all sources (DID) */
    double sigma, chi;
    double limit_value;    /* gating limit formula value; NaN when not computed */
    double epsilon_correction;
    pl_verdict hypothesis_verdict; /* H3 for DIG, H4 for DID */
} pl_phenomenon_result;

pl_status pl_dig_scan(const pl_model* model, const double* m_values, size_t m_count,
                      const double* T_values, size_t T_count, const pl_check_options* options,
                      pl_phenomenon_result* out, char** report_text);

/* Scans the model's growth path for dispersal-induced decay. When the model
 * carries a nonzero migration path, the scan runs under that migration
 * (use_model_migration semantics); otherwise the worst-patch migration is
 * constructed with the given epsilon and returned via constructed_model_json
 * as a full model file. */
pl_status pl_did_scan(const pl_model* model, const double* m_values, size_t m_count,
                      const double* T_values, size_t T_count, double epsilon,
                      const pl_check_options* options, pl_phenomenon_result* out,
                      char** constructed_model_json, char** report_text);

#ifdef __cplusplus
}
#endif

#endif /* PATCHLAM_H */
