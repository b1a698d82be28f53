/* C interface to the transactive market clearing engine.
 *
 * All functions returning int yield TEM_OK (0) on success or an error code;
 * tem_last_error() describes the most recent failure on the calling thread.
 * Objects behind opaque handles are owned by the caller and released with
 * the matching *_free function.
 */
#ifndef TEM_H
#define TEM_H

#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

#define TEM_OK 0
#define TEM_ERR_INVALID 1    /* bad argument, parse or validation failure */
#define TEM_ERR_IO 2         /* file could not be read or written */
#define TEM_ERR_INFEASIBLE 3 /* empty market feasibility window */
#define TEM_ERR_DIVERGENCE 4 /* load flow failed to converge */
#define TEM_ERR_STEP_SIZE 5  /* clearing diverged; reduce the price step */

typedef struct tem_scenario tem_scenario;
typedef struct tem_result tem_result;

typedef struct tem_clearing_config {
    double xi;           /* price step, $/kWh per kW */
    double sigma_v;      /* voltage price coefficient */
    double sigma_f;      /* line-flow price coefficient, per kW */
    double lambda0;      /* initial price, $/kWh */
    double eps_balance;  /* kW; <= 0 selects 0.1% of total maximum demand */
    double eps_price;    /* $/kWh */
    int max_iterations;
    int network_signals; /* nonzero enables voltage/congestion price signals */
} tem_clearing_config;

typedef struct tem_feeder_spec {
    double line_r;          /* p.u. per chain segment */
    double line_x;          /* p.u. per chain segment */
    double f_max;           /* kW per line */
    double v_min;           /* p.u. */
    double v_max;           /* p.u. */
    double base_power_kva;
    double base_voltage_kv;
} tem_feeder_spec;

void tem_clearing_config_default(tem_clearing_config* config);
void tem_feeder_spec_default(tem_feeder_spec* feeder);

/* Message for the last failing call on this thread; empty string if none. */
const char* tem_last_error(void);

/* Scenarios */
int tem_scenario_generate(int n_sellers, int n_buyers, uint64_t seed, tem_scenario** out);
/* As tem_scenario_generate with explicit chain-feeder parameters; feeder may
 * be NULL for the defaults. */
int tem_scenario_generate_ex(int n_sellers, int n_buyers, uint64_t seed,
                             const tem_feeder_spec* feeder, tem_scenario** out);
int tem_scenario_load(const char* path, tem_scenario** out);
int tem_scenario_save(const tem_scenario* scenario, const char* path);
int tem_scenario_counts(const tem_scenario* scenario, int* n_sellers, int* n_buyers,
                        int* n_buses);
void tem_scenario_free(tem_scenario* scenario);

/* Market clearing. A completed but non-converged run still returns TEM_OK;
 * query tem_result_converged. */
int tem_clear(const tem_scenario* scenario, const tem_clearing_config* config,
              tem_result** out);
double tem_result_lambda(const tem_result* result);
int tem_result_iterations(const tem_result* result);
int tem_result_converged(const tem_result* result);
double tem_result_total_supply(const tem_result* result);
double tem_result_total_demand(const tem_result* result);
double tem_result_min_voltage(const tem_result* result);
double tem_result_max_voltage(const tem_result* result);
int tem_result_write_trace_csv(const tem_result* result, const char* path);
int tem_result_write_players_csv(const tem_result* result, const char* path);
void tem_result_free(tem_result* result);

/* Distributed clearing (signals off) against the centralized bisection
 * reference on the same scenario. */
int tem_compare(const tem_scenario* scenario, const tem_clearing_config* config,
                double* lambda_diff, double* max_allocation_diff);

/* Seller-count sweep over generated scenarios of a fixed total size; writes a
 * summary CSV ordered by (count, seed). */
int tem_sweep(int total_players, const int* seller_counts, int n_counts,
              const uint64_t* seeds, int n_seeds, const tem_clearing_config* config,
              const char* out_csv);

/* Cross-validate the direct load flow against Gauss-Seidel on the scenario's
 * network. withdrawal_kw may be NULL for the no-load case; otherwise it must
 * carry one entry per bus. */
int tem_powerflow_check(const tem_scenario* scenario, const double* withdrawal_kw, int n,
                        double* max_discrepancy_pu);

#ifdef __cplusplus
}
#endif

#endif /* TEM_H */
