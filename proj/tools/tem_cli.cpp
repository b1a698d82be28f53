// Command-line front end for the market clearing engine. Talks to the engine
// exclusively through the C API in tem.h.
//
// Exit codes: 0 success, 1 usage/input error, 2 numerical non-convergence.

#include <chrono>
#include <cstdint>
#include <cstdio>
#include <random>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "tem.h"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitError = 1;
constexpr int kExitNoConvergence = 2;

int exit_code_for(int tem_code) {
    switch (tem_code) {
        case TEM_OK:
            return kExitOk;
        case TEM_ERR_DIVERGENCE:
        case TEM_ERR_STEP_SIZE:
            return kExitNoConvergence;
        default:
            return kExitError;
    }
}

int fail(int tem_code) {
    std::fprintf(stderr, "error: %s\n", tem_last_error());
    return exit_code_for(tem_code);
}

struct ConfigFlags {
    tem_clearing_config config;
    std::string network_signals = "on";

    ConfigFlags() { tem_clearing_config_default(&config); }

    void attach(CLI::App* cmd) {
        cmd->add_option("--xi", config.xi, "Price step size ($/kWh per kW)")
            ->capture_default_str();
        cmd->add_option("--lambda0", config.lambda0, "Initial price ($/kWh)")
            ->capture_default_str();
        cmd->add_option("--max-iter", config.max_iterations, "Iteration cap")
            ->capture_default_str();
        cmd->add_option("--eps-balance", config.eps_balance,
                        "Balance tolerance in kW (<=0: 0.1% of total max demand)")
            ->capture_default_str();
        cmd->add_option("--eps-price", config.eps_price, "Price tolerance ($/kWh)")
            ->capture_default_str();
        cmd->add_option("--sigma-v", config.sigma_v, "Voltage price coefficient")
            ->capture_default_str();
        cmd->add_option("--sigma-f", config.sigma_f, "Line-flow price coefficient (per kW)")
            ->capture_default_str();
        cmd->add_option("--network-signals", network_signals,
                        "Enable network price signals (on|off)")
            ->check(CLI::IsMember({"on", "off"}))
            ->capture_default_str();
    }

    const tem_clearing_config* resolve() {
        config.network_signals = (network_signals == "on") ? 1 : 0;
        return &config;
    }
};

struct FeederFlags {
    tem_feeder_spec feeder;

    FeederFlags() { tem_feeder_spec_default(&feeder); }

    void attach(CLI::App* cmd) {
        cmd->add_option("--line-r", feeder.line_r, "Line resistance per segment (p.u.)")
            ->capture_default_str();
        cmd->add_option("--line-x", feeder.line_x, "Line reactance per segment (p.u.)")
            ->capture_default_str();
        cmd->add_option("--f-max", feeder.f_max, "Line flow limit (kW)")->capture_default_str();
        cmd->add_option("--v-min", feeder.v_min, "Lower voltage limit (p.u.)")
            ->capture_default_str();
        cmd->add_option("--v-max", feeder.v_max, "Upper voltage limit (p.u.)")
            ->capture_default_str();
        cmd->add_option("--base-power", feeder.base_power_kva, "Base power (kVA)")
            ->capture_default_str();
        cmd->add_option("--base-voltage", feeder.base_voltage_kv, "Base voltage (kV)")
            ->capture_default_str();
    }
};

// "5:45:5" range or "5,10,15" list.
std::vector<int> parse_counts(const std::string& text) {
    std::vector<int> counts;
    if (text.find(':') != std::string::npos) {
        int lo, hi, step;
        if (std::sscanf(text.c_str(), "%d:%d:%d", &lo, &hi, &step) != 3 || step <= 0)
            throw CLI::ValidationError("--counts", "expected lo:hi:step");
        for (int c = lo; c <= hi; c += step) counts.push_back(c);
    } else {
        std::size_t pos = 0;
        while (pos < text.size()) {
            std::size_t next = text.find(',', pos);
            if (next == std::string::npos) next = text.size();
            counts.push_back(std::stoi(text.substr(pos, next - pos)));
            pos = next + 1;
        }
    }
    if (counts.empty()) throw CLI::ValidationError("--counts", "no counts given");
    return counts;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Local transactive energy market clearing engine"};
    app.require_subcommand(1);
    app.failure_message(CLI::FailureMessage::help);

    // clear
    auto* clear = app.add_subcommand("clear", "Clear a market scenario");
    std::string scenario_path, trace_csv, players_csv;
    ConfigFlags clear_cfg;
    clear->add_option("scenario", scenario_path, "Scenario JSON file")->required();
    clear_cfg.attach(clear);
    clear->add_option("--trace-csv", trace_csv, "Write per-iteration trace CSV");
    clear->add_option("--players-csv", players_csv, "Write per-player allocation CSV");

    // generate
    auto* generate = app.add_subcommand("generate", "Generate a random scenario");
    int gen_sellers = 25, gen_buyers = 25;
    std::uint64_t gen_seed = 42;
    std::string gen_out;
    FeederFlags gen_feeder;
    generate->add_option("--sellers", gen_sellers, "Number of sellers")->capture_default_str();
    generate->add_option("--buyers", gen_buyers, "Number of buyers")->capture_default_str();
    generate->add_option("--seed", gen_seed, "Random seed")->capture_default_str();
    generate->add_option("--out", gen_out, "Output scenario file")->required();
    gen_feeder.attach(generate);

    // compare
    auto* compare = app.add_subcommand("compare",
                                       "Distributed clearing vs centralized reference");
    std::string cmp_path;
    ConfigFlags cmp_cfg;
    compare->add_option("scenario", cmp_path, "Scenario JSON file")->required();
    cmp_cfg.attach(compare);

    // sweep
    auto* sweep = app.add_subcommand("sweep", "Sweep seller counts over generated markets");
    int sweep_total = 50, sweep_seeds = 5;
    std::string sweep_counts = "5:45:5", sweep_out;
    ConfigFlags sweep_cfg;
    sweep->add_option("--total", sweep_total, "Total player count")->capture_default_str();
    sweep->add_option("--counts", sweep_counts, "Seller counts, lo:hi:step or list")
        ->capture_default_str();
    sweep->add_option("--seeds", sweep_seeds, "Number of seeds (1..k)")->capture_default_str();
    sweep->add_option("--out", sweep_out, "Summary CSV path")->required();
    sweep_cfg.attach(sweep);

    // powerflow-check
    auto* pfcheck = app.add_subcommand(
        "powerflow-check", "Cross-validate direct load flow against Gauss-Seidel");
    std::string pf_path;
    std::int64_t pf_random_seed = -1;
    pfcheck->add_option("scenario", pf_path, "Scenario JSON file")->required();
    pfcheck->add_option("--random-seed", pf_random_seed,
                        "Draw random per-bus injections in [-2, 2] kW (default: zero)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? kExitOk : kExitError;
    }

    if (clear->parsed()) {
        tem_scenario* scenario = nullptr;
        int rc = tem_scenario_load(scenario_path.c_str(), &scenario);
        if (rc != TEM_OK) return fail(rc);
        tem_result* result = nullptr;
        const auto t0 = std::chrono::steady_clock::now();
        rc = tem_clear(scenario, clear_cfg.resolve(), &result);
        const auto t1 = std::chrono::steady_clock::now();
        if (rc != TEM_OK) {
            tem_scenario_free(scenario);
            return fail(rc);
        }
        std::printf("lambda_star=%.6f\n", tem_result_lambda(result));
        std::printf("total_supply_kw=%.6f\n", tem_result_total_supply(result));
        std::printf("total_demand_kw=%.6f\n", tem_result_total_demand(result));
        std::printf("iterations=%d\n", tem_result_iterations(result));
        std::printf("converged=%s\n", tem_result_converged(result) ? "true" : "false");
        std::printf("min_voltage_pu=%.6f\n", tem_result_min_voltage(result));
        std::printf("max_voltage_pu=%.6f\n", tem_result_max_voltage(result));
        std::printf("runtime_s=%.3f\n", std::chrono::duration<double>(t1 - t0).count());
        int exit_code = tem_result_converged(result) ? kExitOk : kExitNoConvergence;
        if (!trace_csv.empty()) {
            rc = tem_result_write_trace_csv(result, trace_csv.c_str());
            if (rc != TEM_OK) exit_code = fail(rc);
        }
        if (!players_csv.empty()) {
            rc = tem_result_write_players_csv(result, players_csv.c_str());
            if (rc != TEM_OK) exit_code = fail(rc);
        }
        tem_result_free(result);
        tem_scenario_free(scenario);
        return exit_code;
    }

    if (generate->parsed()) {
        tem_scenario* scenario = nullptr;
        int rc = tem_scenario_generate_ex(gen_sellers, gen_buyers, gen_seed,
                                          &gen_feeder.feeder, &scenario);
        if (rc != TEM_OK) return fail(rc);
        rc = tem_scenario_save(scenario, gen_out.c_str());
        tem_scenario_free(scenario);
        if (rc != TEM_OK) return fail(rc);
        std::printf("scenario=%s\n", gen_out.c_str());
        return kExitOk;
    }

    if (compare->parsed()) {
        tem_scenario* scenario = nullptr;
        int rc = tem_scenario_load(cmp_path.c_str(), &scenario);
        if (rc != TEM_OK) return fail(rc);
        double lambda_diff = 0.0, alloc_diff = 0.0;
        rc = tem_compare(scenario, cmp_cfg.resolve(), &lambda_diff, &alloc_diff);
        tem_scenario_free(scenario);
        if (rc != TEM_OK) return fail(rc);
        std::printf("lambda_diff=%.8f\n", lambda_diff);
        std::printf("max_allocation_diff_kw=%.8f\n", alloc_diff);
        return (lambda_diff <= 1e-3 && alloc_diff <= 1e-2) ? kExitOk : kExitNoConvergence;
    }

    if (sweep->parsed()) {
        std::vector<int> counts;
        try {
            counts = parse_counts(sweep_counts);
        } catch (const CLI::Error& e) {
            std::fprintf(stderr, "error: %s\n", e.what());
            return kExitError;
        }
        std::vector<std::uint64_t> seeds;
        for (int k = 1; k <= sweep_seeds; ++k) seeds.push_back(static_cast<std::uint64_t>(k));
        const int rc = tem_sweep(sweep_total, counts.data(), static_cast<int>(counts.size()),
                                 seeds.data(), static_cast<int>(seeds.size()),
                                 sweep_cfg.resolve(), sweep_out.c_str());
        if (rc != TEM_OK) return fail(rc);
        std::printf("sweep=%s rows=%zu\n", sweep_out.c_str(), counts.size() * seeds.size());
        return kExitOk;
    }

    if (pfcheck->parsed()) {
        tem_scenario* scenario = nullptr;
        int rc = tem_scenario_load(pf_path.c_str(), &scenario);
        if (rc != TEM_OK) return fail(rc);
        int n_buses = 0;
        tem_scenario_counts(scenario, nullptr, nullptr, &n_buses);
        std::vector<double> withdrawal(n_buses, 0.0);
        if (pf_random_seed >= 0) {
            std::mt19937_64 rng(static_cast<std::uint64_t>(pf_random_seed));
            std::uniform_real_distribution<double> dist(-2.0, 2.0);
            for (double& w : withdrawal) w = dist(rng);
        }
        double discrepancy = 0.0;
        rc = tem_powerflow_check(scenario, withdrawal.data(), n_buses, &discrepancy);
        tem_scenario_free(scenario);
        if (rc != TEM_OK) return fail(rc);
        std::printf("max_voltage_discrepancy_pu=%.3e\n", discrepancy);
        return discrepancy <= 1e-8 ? kExitOk : kExitNoConvergence;
    }

    return kExitError;
}
