/* C interface to the hypoinv library. All functions return hi_status; on
 * failure hi_last_error() describes the most recent error on the calling
 * thread. Handles are opaque and released with the matching _destroy. */
#ifndef HYPOINV_H
#define HYPOINV_H

#include <stddef.h>
#include <stdint.h>

#if defined(HYPOINV_BUILDING_LIBRARY)
#define HI_API __attribute__((visibility("default")))
#else
#define HI_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum hi_status {
  HI_OK = 0,
  HI_ERR_INVALID_ARGUMENT = 1,
  HI_ERR_SIZE_MISMATCH = 2,
  HI_ERR_SYMMETRY = 3,
  HI_ERR_SINGULAR = 4,
  HI_ERR_NOT_CONVERGED = 5,
  HI_ERR_CONFIG = 6,
  HI_ERR_IO = 7,
  HI_ERR_USAGE = 8,
  HI_ERR_INTERNAL = 99
} hi_status;

typedef enum hi_regime {
  HI_REGIME_BAYES_I = 0,
  HI_REGIME_BAYES_II,
  HI_REGIME_NO_CONVERGENCE,
  HI_REGIME_FREQUENTIST,
  HI_REGIME_FREQUENTIST_OUTSIDE,
  HI_REGIME_CONTRACTION,
  HI_REGIME_CONTRACTION_OUTSIDE,
  HI_REGIME_CREDIBLE_I,
  HI_REGIME_CREDIBLE_II,
  HI_REGIME_CREDIBLE_OUTSIDE
} hi_regime;

typedef struct hi_lattice hi_lattice;
typedef struct hi_field hi_field;
typedef struct hi_operator hi_operator;

HI_API const char* hi_version(void);
HI_API const char* hi_last_error(void);
HI_API const char* hi_status_name(hi_status status);

/* Lattices: dim in {1,2,3}, n even and >= 4. */
HI_API hi_status hi_lattice_create(int dim, int n, hi_lattice** out);
HI_API void hi_lattice_destroy(hi_lattice* lattice);
HI_API hi_status hi_lattice_size(const hi_lattice* lattice, size_t* out);

/* Fields. Grid samples are row-major at x_j = 2 pi j / n; coefficients are
 * interleaved (re, im) pairs in lattice order. */
HI_API hi_status hi_field_from_grid(const hi_lattice* lattice, const double* values, size_t count, hi_field** out);
HI_API hi_status hi_field_from_coeffs(const hi_lattice* lattice, const double* re_im, size_t count, hi_field** out);
HI_API hi_status hi_field_white_noise(const hi_lattice* lattice, uint64_t seed, hi_field** out);
HI_API void hi_field_destroy(hi_field* field);
HI_API hi_status hi_field_size(const hi_field* field, size_t* out);
HI_API hi_status hi_field_to_grid(const hi_field* field, double* values, size_t count);
HI_API hi_status hi_field_coeffs(const hi_field* field, double* re_im, size_t count);
HI_API hi_status hi_field_sobolev_norm(const hi_field* field, double q, double* out);
HI_API hi_status hi_field_read_csv(const char* path, hi_field** out);
HI_API hi_status hi_field_write_csv(const hi_field* field, const char* path);

/* Fourier multiplier operators. */
HI_API hi_status hi_operator_identity(hi_operator** out);
HI_API hi_status hi_operator_bessel(double a, hi_operator** out);
HI_API hi_status hi_operator_heat(int spatial_dim, hi_operator** out);
HI_API hi_status hi_operator_compose(const hi_operator* a, const hi_operator* b, hi_operator** out);
HI_API hi_status hi_operator_adjoint(const hi_operator* op, hi_operator** out);
HI_API hi_status hi_operator_orders(const hi_operator* op, double* t, double* t0);
HI_API hi_status hi_operator_apply(const hi_operator* op, const hi_field* u, hi_field** out);
HI_API void hi_operator_destroy(hi_operator* op);

/* MAP estimate (A*A + delta^2 C^-1)^-1 A* m and the posterior trace on H^q. */
HI_API hi_status hi_map_estimate(const hi_operator* forward, const hi_operator* prior_cov, double delta,
                                 const hi_field* data, hi_field** out);
HI_API hi_status hi_posterior_trace(const hi_operator* forward, const hi_operator* prior_cov, double delta,
                                    const hi_lattice* lattice, double q, double* out);

/* Rate calculator. NaN for kappa or alpha means "not supplied". */
typedef struct hi_params {
  double r;
  double s;
  double t;
  double t0;
  int d;
} hi_params;

typedef struct hi_rate {
  double exponent;
  hi_regime regime;
  int hypotheses_ok;
  int has_secondary;
  double secondary;
} hi_rate;

HI_API hi_status hi_bayes_rate(const hi_params* p, double zeta, hi_rate* out);
HI_API hi_status hi_frequentist_rate(const hi_params* p, hi_rate* out);
HI_API hi_status hi_contraction_rate(const hi_params* p, double kappa, hi_rate* out);
HI_API hi_status hi_credible_rate(const hi_params* p, double zeta1, double alpha, hi_rate* out);
HI_API const char* hi_regime_name(hi_regime regime);

/* Parameters implied by the model section of a config file. */
HI_API hi_status hi_params_from_config(const char* config_path, hi_params* out);

/* Text report of all four rate statements. Writes at most cap bytes
 * (NUL-terminated) and stores the full length in *needed. */
HI_API hi_status hi_rates_report(const hi_params* p, double zeta, double kappa, double zeta1, double alpha, char* buf,
                                 size_t cap, size_t* needed);

/* Command entry points. Strings may be NULL; has_seed / threads <= 0 mean
 * "use the config value". */
typedef struct hi_run_options {
  const char* config_path;
  const char* data_path;
  const char* out_dir;
  int force;
  int has_seed;
  uint64_t seed;
  int threads;
} hi_run_options;

HI_API hi_status hi_run_estimate(const hi_run_options* opts);
HI_API hi_status hi_run_experiment(const hi_run_options* opts);

#ifdef __cplusplus
}
#endif

#endif
