#ifndef BERMUDAN_H
#define BERMUDAN_H
/*
 * C interface to the Bermudan swaption hedging library.
 *
 * Objects are opaque handles created by *_new / *_fit / *_load style calls
 * and released with the matching *_free. Every fallible call returns a
 * bh_status; on failure bh_last_error() holds a message for the calling
 * thread. Handles may be shared between threads for reading, but a handle
 * must not be freed while another thread uses it.
 */

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define BH_API __declspec(dllexport)
#else
#define BH_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum bh_status {
    BH_OK = 0,
    BH_ERR_INVALID_ARGUMENT = 1, /* bad option value or null pointer */
    BH_ERR_DOMAIN = 2,           /* input outside the model domain (t > T, m >= M, ...) */
    BH_ERR_CONTRACT = 3,         /* objects with mismatched shapes */
    BH_ERR_NUMERIC = 4,          /* non-finite or degenerate numbers */
    BH_ERR_TRAINING = 5,         /* optimizer diverged */
    BH_ERR_IO = 6,               /* file could not be read or written */
    BH_ERR_UNKNOWN = 99
} bh_status;

typedef struct bh_model bh_model;
typedef struct bh_contract bh_contract;
typedef struct bh_hedge bh_hedge;
typedef struct bh_bounds bh_bounds;
typedef struct bh_hedge_report bh_hedge_report;

BH_API const char* bh_version(void);
BH_API const char* bh_last_error(void);
BH_API const char* bh_status_name(bh_status status);

/* Worker threads for Monte Carlo loops; 0 selects the hardware count. */
BH_API void bh_set_threads(unsigned n);
BH_API unsigned bh_threads(void);

/* ---- model ---------------------------------------------------------- */

BH_API bh_status bh_model_hull_white(double a, double sigma, double f0, bh_model** out);
BH_API bh_status bh_model_g2pp(double a1, double a2, double sigma1, double sigma2, double rho,
                               double f0, bh_model** out);
/* d factors; rho is a row-major d x d correlation matrix. */
BH_API bh_status bh_model_gaussian(size_t d, const double* a, const double* sigma,
                                   const double* rho, double f0, bh_model** out);
BH_API size_t bh_model_factors(const bh_model* model);
/* P(t, T) in state x (length d). */
BH_API bh_status bh_model_bond_price(const bh_model* model, double t, double T, const double* x,
                                     double* out);
BH_API void bh_model_free(bh_model* model);

/* ---- contract ------------------------------------------------------- */

typedef enum bh_style { BH_EUROPEAN = 0, BH_BERMUDAN = 1 } bh_style;

/* Swaption on the swap from start to end with `frequency` payments a year.
 * European contracts exercise at start only. */
BH_API bh_status bh_contract_new(bh_style style, int payer, double notional, double strike,
                                 double start, double end, int frequency, bh_contract** out);
BH_API bh_status bh_contract_set_strike(bh_contract* contract, double strike);
BH_API double bh_contract_strike(const bh_contract* contract);
BH_API double bh_contract_notional(const bh_contract* contract);
BH_API size_t bh_contract_exercise_count(const bh_contract* contract);
/* Forward swap rate at time 0 for the first exercise date. */
BH_API bh_status bh_contract_swap_rate(const bh_model* model, const bh_contract* contract,
                                       double* out);
BH_API void bh_contract_free(bh_contract* contract);

/* ---- hedge fitting -------------------------------------------------- */

typedef enum bh_design {
    BH_DESIGN_ONE_FACTOR = 0,
    BH_DESIGN_LOCALLY_CONNECTED = 1,
    BH_DESIGN_FULLY_CONNECTED_LOG = 2
} bh_design;

typedef enum bh_measure { BH_MEASURE_RISK_NEUTRAL = 0, BH_MEASURE_FORWARD = 1 } bh_measure;

typedef struct bh_train_config {
    size_t n_paths;
    size_t q;           /* hidden nodes */
    bh_design design;
    size_t n_inputs;    /* 0: design default */
    double dt;          /* simulation step */
    bh_measure measure;
    double domain_scale;  /* vol multiplier for the widened share of states */
    double wide_fraction; /* share of training states drawn with scaled vols */
    size_t epochs;
    size_t batch;
    double learning_rate;
    double final_learning_rate;
    double tolerance;
    size_t patience;
    int shuffle;
    int refit_output;
} bh_train_config;

BH_API void bh_train_config_default(bh_train_config* cfg);

typedef struct bh_date_diagnostics {
    size_t index;
    double date;
    double mse;
    double mae;
    double discounted_mae;
    size_t epochs;
} bh_date_diagnostics;

typedef struct bh_margins {
    double epsilon; /* max per-date discounted MAE */
    double direct;  /* M eps */
    double lower;   /* 2 (M - 1) eps */
    double upper;   /* M (M - 1) eps */
} bh_margins;

/* The hedge keeps its own copy of the model. */
BH_API bh_status bh_hedge_fit(const bh_model* model, const bh_contract* contract,
                              const bh_train_config* cfg, uint64_t seed, bh_hedge** out);
BH_API bh_status bh_hedge_load(const bh_model* model, const char* path, bh_hedge** out);
BH_API bh_status bh_hedge_save(const bh_hedge* hedge, const char* path);
BH_API double bh_hedge_direct(const bh_hedge* hedge);
BH_API size_t bh_hedge_dates(const bh_hedge* hedge);
BH_API bh_status bh_hedge_diagnostics(const bh_hedge* hedge, size_t m, bh_date_diagnostics* out);
BH_API bh_status bh_hedge_margins(const bh_hedge* hedge, bh_margins* out);
/* Closed-form value at time t <= T_m, state x, of the portfolio G_m. */
BH_API bh_status bh_hedge_value(const bh_hedge* hedge, size_t m, double t, const double* x,
                                double* out);
BH_API bh_status bh_hedge_write_diagnostics_csv(const bh_hedge* hedge, const char* path);
/* One row per hidden node per monitor date. */
BH_API bh_status bh_hedge_write_portfolio_csv(const bh_hedge* hedge, const char* path);
BH_API void bh_hedge_free(bh_hedge* hedge);

/* ---- bounds --------------------------------------------------------- */

typedef struct bh_bound_options {
    size_t n_paths;
    size_t n_runs;
    uint64_t seed;
    bh_measure measure;
    double dt;
} bh_bound_options;

typedef struct bh_bound_summary {
    double lower, lower_se;
    double upper, upper_se;
    size_t n_runs;
    size_t n_paths;
} bh_bound_summary;

typedef struct bh_bound_run {
    double lower, lower_se;
    double upper, upper_se;
    double exercise_rate;
} bh_bound_run;

BH_API void bh_bound_options_default(bh_bound_options* opts);
BH_API bh_status bh_bounds_estimate(const bh_hedge* hedge, const bh_bound_options* opts,
                                    bh_bounds** out);
BH_API void bh_bounds_summary(const bh_bounds* bounds, bh_bound_summary* out);
BH_API bh_status bh_bounds_run(const bh_bounds* bounds, size_t run, bh_bound_run* out);
/* Mean and SE of the deflated martingale increment at date m in a run. */
BH_API bh_status bh_bounds_increment(const bh_bounds* bounds, size_t run, size_t m, double* mean,
                                     double* se);
BH_API void bh_bounds_free(bh_bounds* bounds);

/* ---- benchmarks ----------------------------------------------------- */

/* European swaption price, one-factor models only. */
BH_API bh_status bh_jamshidian(const bh_model* model, const bh_contract* contract, double* out);
BH_API bh_status bh_mc_european(const bh_model* model, const bh_contract* contract,
                                size_t n_paths, uint64_t seed, double* price, double* se);
/* Hull-White delta in units of the receiver forward swap per unit notional. */
BH_API bh_status bh_hw_delta(const bh_model* model, const bh_contract* contract, double t,
                             double x, double* out);

typedef struct bh_lsm_options {
    size_t n_paths;
    size_t n_runs;
    uint64_t seed;
    double dt;
    int out_of_sample;
} bh_lsm_options;

typedef struct bh_lsm_result {
    double price;
    double se;
    double ci_low;
    double ci_high;
    size_t n_runs;
    size_t n_warnings;
} bh_lsm_result;

BH_API void bh_lsm_options_default(bh_lsm_options* opts);
BH_API bh_status bh_lsm_price(const bh_model* model, const bh_contract* contract,
                              const bh_lsm_options* opts, bh_lsm_result* out);

/* ---- hedge errors --------------------------------------------------- */

typedef struct bh_hedge_summary {
    double mean, sd, p95, p95_abs; /* bp of notional */
    size_t n_paths;
    uint64_t seed;
} bh_hedge_summary;

BH_API bh_status bh_hedge_error_static(const bh_hedge* hedge, size_t n_paths, uint64_t seed,
                                       bh_hedge_report** out);
BH_API bh_status bh_hedge_error_dynamic(const bh_model* model, const bh_contract* contract,
                                        size_t rebalances, size_t n_paths, uint64_t seed,
                                        bh_hedge_report** out);
BH_API bh_status bh_hedge_error_semistatic(const bh_hedge* hedge, size_t n_paths, uint64_t seed,
                                           int discounted, bh_hedge_report** out);
BH_API void bh_report_summary(const bh_hedge_report* report, bh_hedge_summary* out);
BH_API const char* bh_report_strategy(const bh_hedge_report* report);
BH_API const double* bh_report_errors(const bh_hedge_report* report, size_t* n);
BH_API bh_status bh_report_write_errors_csv(const bh_hedge_report* report, const char* path);
BH_API void bh_report_free(bh_hedge_report* report);

#ifdef __cplusplus
}
#endif

#endif /* BERMUDAN_H */
