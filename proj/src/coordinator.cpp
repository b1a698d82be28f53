#include "coordinator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "errors.hpp"

namespace tem {

double update_price(double lambda, double total_supply, double total_demand, double xi) {
    return std::max(0.0, lambda - xi * (total_supply - total_demand));
}

int nearest_seller(const Network& net, int violating_node,
                   const std::vector<SellerParams>& sellers) {
    return nearest_seller(net, Topology(net), violating_node, sellers);
}

int nearest_seller(const Network& net, const Topology& topo, int violating_node,
                   const std::vector<SellerParams>& sellers) {
    if (sellers.empty()) throw ContractError("nearest_seller: no sellers");
    int best = -1;
    double best_dist = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < sellers.size(); ++i) {
        const double dist = topo.electrical_distance(net, violating_node, sellers[i].node);
        const bool closer = dist < best_dist;
        const bool tie_lower_bus =
            dist == best_dist && best >= 0 && sellers[i].node < sellers[best].node;
        if (closer || tie_lower_bus) {
            best = static_cast<int>(i);
            best_dist = dist;
        }
    }
    return best;
}

std::vector<double> voltage_price_signals(const PowerFlowSolution& sol, const Network& net,
                                          double lambda, double sigma_v,
                                          const std::vector<SellerParams>& sellers) {
    return voltage_price_signals(sol, net, Topology(net), lambda, sigma_v, sellers);
}

std::vector<double> voltage_price_signals(const PowerFlowSolution& sol, const Network& net,
                                          const Topology& topo, double lambda, double sigma_v,
                                          const std::vector<SellerParams>& sellers) {
    std::vector<double> omega(sellers.size(), 0.0);
    const ViolationReport report = check_limits(sol, net);
    for (const VoltageViolation& v : report.voltage) {
        const double bound = v.excess > 0.0 ? net.v_max : net.v_min;
        const double signal = sigma_v * lambda * (bound - v.magnitude);
        omega[nearest_seller(net, topo, v.node, sellers)] += signal;
    }
    return omega;
}

std::vector<double> congestion_price_signals(const PowerFlowSolution& sol,
                                             const Eigen::MatrixXd& ptdf, const Network& net,
                                             double lambda, double sigma_f,
                                             const std::vector<BuyerParams>& buyers) {
    std::vector<double> rho(buyers.size(), 0.0);
    std::unordered_map<int, int> bus_index;
    for (std::size_t i = 0; i < net.buses.size(); ++i)
        bus_index[net.buses[i]] = static_cast<int>(i);
    for (std::size_t l = 0; l < sol.line_flows.size(); ++l) {
        const double excess = sol.line_flows[l] - net.lines[l].f_max;
        if (excess <= 0.0) continue;
        const double surcharge = sigma_f * lambda * excess;
        for (std::size_t j = 0; j < buyers.size(); ++j) {
            const auto it = bus_index.find(buyers[j].node);
            if (it == bus_index.end())
                throw ContractError("congestion_price_signals: unknown buyer node");
            if (ptdf(static_cast<int>(l), it->second) > 0.5) rho[j] += surcharge;
        }
    }
    return rho;
}

std::tuple<std::vector<double>, std::vector<double>, double> balance_transfers(
    const std::vector<double>& omega_signal, const std::vector<double>& rho_signal) {
    const double omega_sum = std::accumulate(omega_signal.begin(), omega_signal.end(), 0.0);
    const double rho_sum = std::accumulate(rho_signal.begin(), rho_signal.end(), 0.0);
    if (omega_sum != 0.0 && rho_sum != 0.0) {
        const double beta = omega_sum / rho_sum;
        if (beta > 0.0) {
            std::vector<double> rho = rho_signal;
            for (double& r : rho) r *= beta;
            return {omega_signal, std::move(rho), 0.0};
        }
    }
    return {omega_signal, rho_signal, omega_sum - rho_sum};
}

double resolve_eps_balance(const Scenario& scenario, const ClearingConfig& config) {
    if (config.eps_balance > 0.0) return config.eps_balance;
    double d_max_total = 0.0;
    for (const auto& b : scenario.buyers) d_max_total += b.d_max;
    return 0.001 * d_max_total;
}

namespace {

bool violations_within_tolerance(const ViolationReport& report, const Network& net) {
    for (const VoltageViolation& v : report.voltage)
        if (std::abs(v.excess) > kVoltageViolationTol) return false;
    for (const FlowViolation& f : report.flow)
        if (std::abs(f.excess) > kFlowViolationTolFrac * net.lines[f.line_index].f_max)
            return false;
    return true;
}

}  // namespace

ClearingResult clear_market(const Scenario& scenario, const ClearingConfig& config) {
    if (config.xi <= 0.0) throw ContractError("clear_market: xi must be positive");
    if (config.max_iterations < 1) throw ContractError("clear_market: max_iterations must be >= 1");

    const auto& sellers = scenario.sellers;
    const auto& buyers = scenario.buyers;
    double s_min = 0, s_max = 0, d_min = 0, d_max = 0;
    for (const auto& p : sellers) { s_min += p.s_min; s_max += p.s_max; }
    for (const auto& p : buyers) { d_min += p.d_min; d_max += p.d_max; }
    if (s_max < d_min || d_max < s_min)
        throw InfeasibleError("infeasible scenario: supply and demand windows do not overlap");

    const double eps_balance = resolve_eps_balance(scenario, config);
    const DirectLoadFlow solver(scenario.network);
    const Topology& topo = solver.topology();
    const Eigen::MatrixXd& ptdf = solver.bibc();
    std::vector<int> s_idx(sellers.size()), b_idx(buyers.size());
    for (std::size_t i = 0; i < sellers.size(); ++i) s_idx[i] = topo.bus_index(sellers[i].node);
    for (std::size_t j = 0; j < buyers.size(); ++j) b_idx[j] = topo.bus_index(buyers[j].node);

    ClearingResult result;
    std::vector<double> omega(sellers.size(), 0.0);
    std::vector<double> rho(buyers.size(), 0.0);
    double lambda = config.lambda0;

    double prev_abs_mismatch = 0.0;
    int growth_streak = 0;

    for (int k = 0; k < config.max_iterations; ++k) {
        std::vector<double> supply(sellers.size()), demand(buyers.size());
        double total_supply = 0.0, total_demand = 0.0;
        for (std::size_t i = 0; i < sellers.size(); ++i) {
            supply[i] = seller_best_response(sellers[i], lambda + omega[i]);
            total_supply += supply[i];
        }
        for (std::size_t j = 0; j < buyers.size(); ++j) {
            demand[j] = buyer_best_response(buyers[j], lambda + rho[j]);
            total_demand += demand[j];
        }
        const double mismatch = total_supply - total_demand;

        std::vector<double> withdrawal(topo.num_buses(), 0.0);
        for (std::size_t j = 0; j < buyers.size(); ++j) withdrawal[b_idx[j]] += demand[j];
        for (std::size_t i = 0; i < sellers.size(); ++i) withdrawal[s_idx[i]] -= supply[i];
        PowerFlowSolution pf = solver.solve(withdrawal);
        const ViolationReport report = check_limits(pf, scenario.network);

        double imbalance = 0.0;
        if (config.network_signals) {
            const std::vector<double> omega_raw = voltage_price_signals(
                pf, scenario.network, topo, lambda, config.sigma_v, sellers);
            const std::vector<double> rho_raw = congestion_price_signals(
                pf, ptdf, scenario.network, lambda, config.sigma_f, buyers);
            std::tie(omega, rho, imbalance) = balance_transfers(omega_raw, rho_raw);
        }

        const double lambda_next = update_price(lambda, total_supply, total_demand, config.xi);

        TraceRecord rec;
        rec.iteration = k;
        rec.lambda = lambda;
        rec.total_supply = total_supply;
        rec.total_demand = total_demand;
        rec.mismatch = mismatch;
        rec.min_voltage = pf.voltages.size() ? pf.voltages.cwiseAbs().minCoeff() : 1.0;
        rec.max_voltage = pf.voltages.size() ? pf.voltages.cwiseAbs().maxCoeff() : 1.0;
        rec.max_line_loading = 0.0;
        for (std::size_t l = 0; l < pf.line_flows.size(); ++l)
            rec.max_line_loading = std::max(
                rec.max_line_loading,
                100.0 * std::abs(pf.line_flows[l]) / scenario.network.lines[l].f_max);
        rec.omega_total = std::accumulate(omega.begin(), omega.end(), 0.0);
        rec.rho_total = std::accumulate(rho.begin(), rho.end(), 0.0);
        rec.transfer_imbalance = imbalance;
        result.trace.push_back(rec);

        result.supply = std::move(supply);
        result.demand = std::move(demand);
        result.final_solution = std::move(pf);
        result.iterations = k + 1;

        const bool limits_ok =
            !config.network_signals || violations_within_tolerance(report, scenario.network);
        if (std::abs(mismatch) <= eps_balance &&
            std::abs(lambda_next - lambda) <= config.eps_price && limits_ok) {
            result.converged = true;
            lambda = lambda_next;
            break;
        }

        // A balance residual growing monotonically for a long stretch means the
        // step size overshoots the crossing.
        if (k > 0 && std::abs(mismatch) > prev_abs_mismatch) {
            if (++growth_streak >= 50)
                throw StepSizeError(
                    "balance residual grew over 50 consecutive iterations; reduce xi");
        } else {
            growth_streak = 0;
        }
        prev_abs_mismatch = std::abs(mismatch);

        lambda = lambda_next;
    }

    result.lambda_star = lambda;
    for (std::size_t i = 0; i < sellers.size(); ++i)
        result.players.push_back({static_cast<int>(i), true, sellers[i].node, result.supply[i],
                                  lambda + omega[i]});
    for (std::size_t j = 0; j < buyers.size(); ++j)
        result.players.push_back({static_cast<int>(sellers.size() + j), false, buyers[j].node,
                                  result.demand[j], lambda + rho[j]});
    return result;
}

}  // namespace tem
