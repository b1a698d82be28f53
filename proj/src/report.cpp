#include "report.hpp"

#include <chrono>
#include <fstream>
#include <iomanip>

#include "errors.hpp"

namespace tem {

namespace {
std::ofstream open_out(const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    out << std::setprecision(12);
    return out;
}
}  // namespace

void write_trace(const ClearingResult& result, const std::string& path) {
    std::ofstream out = open_out(path);
    out << "iteration,lambda,total_supply_kw,total_demand_kw,mismatch_kw,min_voltage_pu,"
           "max_voltage_pu,max_line_loading_pct,omega_total,rho_total,transfer_imbalance\n";
    for (const TraceRecord& r : result.trace) {
        out << r.iteration << ',' << r.lambda << ',' << r.total_supply << ',' << r.total_demand
            << ',' << r.mismatch << ',' << r.min_voltage << ',' << r.max_voltage << ','
            << r.max_line_loading << ',' << r.omega_total << ',' << r.rho_total << ','
            << r.transfer_imbalance << '\n';
    }
    if (!result.converged) out << "# converged=false\n";
    if (!out) throw std::runtime_error("write failed: " + path);
}

void write_players(const ClearingResult& result, const std::string& path) {
    std::ofstream out = open_out(path);
    out << "player_id,role,node,allocation_kw,effective_price\n";
    for (const PlayerRow& p : result.players) {
        out << p.player_id << ',' << (p.is_seller ? "seller" : "buyer") << ',' << p.node << ','
            << p.allocation << ',' << p.effective_price << '\n';
    }
    if (!out) throw std::runtime_error("write failed: " + path);
}

std::vector<SweepRow> sweep_sellers(int total_players, const std::vector<int>& seller_counts,
                                    const std::vector<std::uint64_t>& seeds,
                                    const ClearingConfig& config) {
    for (int count : seller_counts)
        if (count <= 0 || count >= total_players)
            throw ContractError("sweep_sellers: seller count must leave at least one buyer");

    std::vector<SweepRow> rows;
    for (int count : seller_counts) {
        for (std::uint64_t seed : seeds) {
            const Scenario scenario = generate_scenario(count, total_players - count, seed);
            const auto t0 = std::chrono::steady_clock::now();
            const ClearingResult r = clear_market(scenario, config);
            const auto t1 = std::chrono::steady_clock::now();
            rows.push_back({count, seed, r.lambda_star, r.iterations,
                            std::chrono::duration<double>(t1 - t0).count(), r.converged});
        }
    }
    return rows;
}

void write_sweep(const std::vector<SweepRow>& rows, const std::string& path) {
    std::ofstream out = open_out(path);
    out << "seller_count,seed,lambda_star,iterations,runtime_s,converged\n";
    for (const SweepRow& r : rows) {
        out << r.seller_count << ',' << r.seed << ',' << r.lambda_star << ',' << r.iterations
            << ',' << r.runtime_seconds << ',' << (r.converged ? "true" : "false") << '\n';
    }
    if (!out) throw std::runtime_error("write failed: " + path);
}

}  // namespace tem
