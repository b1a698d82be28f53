#include "tem.h"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <string>

#include "coordinator.hpp"
#include "errors.hpp"
#include "oracle.hpp"
#include "report.hpp"
#include "scenario.hpp"

namespace {

thread_local std::string g_last_error;

struct ScenarioHandle {
    tem::Scenario scenario;
};

struct ResultHandle {
    tem::ClearingResult result;
};

const tem::Scenario& unwrap(const tem_scenario* h) {
    return reinterpret_cast<const ScenarioHandle*>(h)->scenario;
}
const tem::ClearingResult& unwrap(const tem_result* h) {
    return reinterpret_cast<const ResultHandle*>(h)->result;
}

tem::ClearingConfig to_config(const tem_clearing_config* c) {
    tem::ClearingConfig config;
    if (c) {
        config.xi = c->xi;
        config.sigma_v = c->sigma_v;
        config.sigma_f = c->sigma_f;
        config.lambda0 = c->lambda0;
        config.eps_balance = c->eps_balance;
        config.eps_price = c->eps_price;
        config.max_iterations = c->max_iterations;
        config.network_signals = c->network_signals != 0;
    }
    return config;
}

template <typename Fn>
int guarded(Fn&& fn) {
    try {
        fn();
        g_last_error.clear();
        return TEM_OK;
    } catch (const tem::InfeasibleError& e) {
        g_last_error = e.what();
        return TEM_ERR_INFEASIBLE;
    } catch (const tem::PowerFlowDivergence& e) {
        g_last_error = e.what();
        return TEM_ERR_DIVERGENCE;
    } catch (const tem::StepSizeError& e) {
        g_last_error = e.what();
        return TEM_ERR_STEP_SIZE;
    } catch (const std::runtime_error& e) {
        g_last_error = e.what();
        // I/O failures carry an explanatory path in the message.
        return std::strstr(e.what(), "cannot open") || std::strstr(e.what(), "write failed")
                   ? TEM_ERR_IO
                   : TEM_ERR_INVALID;
    } catch (const std::exception& e) {
        g_last_error = e.what();
        return TEM_ERR_INVALID;
    }
}

}  // namespace

extern "C" {

void tem_clearing_config_default(tem_clearing_config* config) {
    if (!config) return;
    const tem::ClearingConfig d;
    config->xi = d.xi;
    config->sigma_v = d.sigma_v;
    config->sigma_f = d.sigma_f;
    config->lambda0 = d.lambda0;
    config->eps_balance = d.eps_balance;
    config->eps_price = d.eps_price;
    config->max_iterations = d.max_iterations;
    config->network_signals = d.network_signals ? 1 : 0;
}

void tem_feeder_spec_default(tem_feeder_spec* feeder) {
    if (!feeder) return;
    const tem::FeederSpec d;
    feeder->line_r = d.line_r;
    feeder->line_x = d.line_x;
    feeder->f_max = d.f_max;
    feeder->v_min = d.v_min;
    feeder->v_max = d.v_max;
    feeder->base_power_kva = d.base_power;
    feeder->base_voltage_kv = d.base_voltage;
}

const char* tem_last_error(void) { return g_last_error.c_str(); }

int tem_scenario_generate(int n_sellers, int n_buyers, uint64_t seed, tem_scenario** out) {
    return tem_scenario_generate_ex(n_sellers, n_buyers, seed, nullptr, out);
}

int tem_scenario_generate_ex(int n_sellers, int n_buyers, uint64_t seed,
                             const tem_feeder_spec* feeder, tem_scenario** out) {
    if (!out) return TEM_ERR_INVALID;
    return guarded([&] {
        tem::FeederSpec spec;
        if (feeder) {
            spec.line_r = feeder->line_r;
            spec.line_x = feeder->line_x;
            spec.f_max = feeder->f_max;
            spec.v_min = feeder->v_min;
            spec.v_max = feeder->v_max;
            spec.base_power = feeder->base_power_kva;
            spec.base_voltage = feeder->base_voltage_kv;
        }
        auto* h = new ScenarioHandle{tem::generate_scenario(n_sellers, n_buyers, seed, spec)};
        *out = reinterpret_cast<tem_scenario*>(h);
    });
}

int tem_scenario_load(const char* path, tem_scenario** out) {
    if (!path || !out) return TEM_ERR_INVALID;
    return guarded([&] {
        auto* h = new ScenarioHandle{tem::load_scenario(path)};
        *out = reinterpret_cast<tem_scenario*>(h);
    });
}

int tem_scenario_save(const tem_scenario* scenario, const char* path) {
    if (!scenario || !path) return TEM_ERR_INVALID;
    return guarded([&] { tem::save_scenario(unwrap(scenario), path); });
}

int tem_scenario_counts(const tem_scenario* scenario, int* n_sellers, int* n_buyers,
                        int* n_buses) {
    if (!scenario) return TEM_ERR_INVALID;
    const tem::Scenario& s = unwrap(scenario);
    if (n_sellers) *n_sellers = static_cast<int>(s.sellers.size());
    if (n_buyers) *n_buyers = static_cast<int>(s.buyers.size());
    if (n_buses) *n_buses = static_cast<int>(s.network.buses.size());
    return TEM_OK;
}

void tem_scenario_free(tem_scenario* scenario) {
    delete reinterpret_cast<ScenarioHandle*>(scenario);
}

int tem_clear(const tem_scenario* scenario, const tem_clearing_config* config,
              tem_result** out) {
    if (!scenario || !out) return TEM_ERR_INVALID;
    return guarded([&] {
        auto* h = new ResultHandle{tem::clear_market(unwrap(scenario), to_config(config))};
        *out = reinterpret_cast<tem_result*>(h);
    });
}

double tem_result_lambda(const tem_result* r) { return unwrap(r).lambda_star; }
int tem_result_iterations(const tem_result* r) { return unwrap(r).iterations; }
int tem_result_converged(const tem_result* r) { return unwrap(r).converged ? 1 : 0; }

double tem_result_total_supply(const tem_result* r) {
    double total = 0.0;
    for (double s : unwrap(r).supply) total += s;
    return total;
}

double tem_result_total_demand(const tem_result* r) {
    double total = 0.0;
    for (double d : unwrap(r).demand) total += d;
    return total;
}

double tem_result_min_voltage(const tem_result* r) {
    const auto& v = unwrap(r).final_solution.voltages;
    return v.size() ? v.cwiseAbs().minCoeff() : 1.0;
}

double tem_result_max_voltage(const tem_result* r) {
    const auto& v = unwrap(r).final_solution.voltages;
    return v.size() ? v.cwiseAbs().maxCoeff() : 1.0;
}

int tem_result_write_trace_csv(const tem_result* r, const char* path) {
    if (!r || !path) return TEM_ERR_INVALID;
    return guarded([&] { tem::write_trace(unwrap(r), path); });
}

int tem_result_write_players_csv(const tem_result* r, const char* path) {
    if (!r || !path) return TEM_ERR_INVALID;
    return guarded([&] { tem::write_players(unwrap(r), path); });
}

void tem_result_free(tem_result* r) { delete reinterpret_cast<ResultHandle*>(r); }

int tem_compare(const tem_scenario* scenario, const tem_clearing_config* config,
                double* lambda_diff, double* max_allocation_diff) {
    if (!scenario) return TEM_ERR_INVALID;
    return guarded([&] {
        const tem::Scenario& s = unwrap(scenario);
        tem::ClearingConfig cfg = to_config(config);
        cfg.network_signals = false;
        const tem::ClearingResult distributed = tem::clear_market(s, cfg);
        const tem::oracle::CentralizedResult centralized = tem::oracle::centralized_clear(s);
        double gap = 0.0;
        for (std::size_t i = 0; i < distributed.supply.size(); ++i)
            gap = std::max(gap, std::abs(distributed.supply[i] - centralized.supply[i]));
        for (std::size_t j = 0; j < distributed.demand.size(); ++j)
            gap = std::max(gap, std::abs(distributed.demand[j] - centralized.demand[j]));
        if (lambda_diff)
            *lambda_diff = std::abs(distributed.lambda_star - centralized.lambda_star);
        if (max_allocation_diff) *max_allocation_diff = gap;
    });
}

int tem_sweep(int total_players, const int* seller_counts, int n_counts,
              const uint64_t* seeds, int n_seeds, const tem_clearing_config* config,
              const char* out_csv) {
    if (!seller_counts || n_counts < 1 || !seeds || n_seeds < 1 || !out_csv)
        return TEM_ERR_INVALID;
    return guarded([&] {
        const std::vector<int> counts(seller_counts, seller_counts + n_counts);
        const std::vector<std::uint64_t> seed_list(seeds, seeds + n_seeds);
        const auto rows = tem::sweep_sellers(total_players, counts, seed_list, to_config(config));
        tem::write_sweep(rows, out_csv);
    });
}

int tem_powerflow_check(const tem_scenario* scenario, const double* withdrawal_kw, int n,
                        double* max_discrepancy_pu) {
    if (!scenario) return TEM_ERR_INVALID;
    return guarded([&] {
        const tem::Scenario& s = unwrap(scenario);
        const int buses = static_cast<int>(s.network.buses.size());
        std::vector<double> withdrawal(buses, 0.0);
        if (withdrawal_kw) {
            if (n != buses) throw tem::ContractError("withdrawal length must match bus count");
            withdrawal.assign(withdrawal_kw, withdrawal_kw + n);
        }
        const auto direct = tem::solve_power_flow(s.network, withdrawal);
        const auto reference = tem::oracle::gauss_seidel_power_flow(s.network, withdrawal);
        const double diff = (direct.voltages - reference.voltages).cwiseAbs().maxCoeff();
        if (max_discrepancy_pu) *max_discrepancy_pu = diff;
    });
}

}  // extern "C"
