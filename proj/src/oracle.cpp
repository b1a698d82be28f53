#include "oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "agents.hpp"
#include "errors.hpp"

namespace tem {
namespace oracle {

double excess_supply(const Scenario& scenario, double lambda) {
    double e = 0.0;
    for (const auto& p : scenario.sellers) e += seller_best_response(p, lambda);
    for (const auto& p : scenario.buyers) e -= buyer_best_response(p, lambda);
    return e;
}

CentralizedResult centralized_clear(const Scenario& scenario) {
    double lambda_hi = 0.0;
    for (const auto& p : scenario.buyers) lambda_hi = std::max(lambda_hi, p.omega);
    for (const auto& p : scenario.sellers)
        lambda_hi = std::max(lambda_hi, p.b + 2.0 * p.a * p.s_max);
    lambda_hi += 1.0;

    double lo = 0.0, hi = lambda_hi;
    double e_lo = excess_supply(scenario, lo);
    double e_hi = excess_supply(scenario, hi);
    if (e_lo > 0.0 || e_hi < 0.0)
        throw InfeasibleError("centralized_clear: excess supply has no sign change on [0, " +
                              std::to_string(lambda_hi) + "]");

    double mid = lo;
    while (hi - lo > 1e-9) {
        mid = 0.5 * (lo + hi);
        const double e = excess_supply(scenario, mid);
        if (std::abs(e) <= 1e-6) break;
        if (e > 0.0)
            hi = mid;
        else
            lo = mid;
    }

    CentralizedResult result;
    result.lambda_star = mid;
    for (const auto& p : scenario.sellers)
        result.supply.push_back(seller_best_response(p, mid));
    for (const auto& p : scenario.buyers)
        result.demand.push_back(buyer_best_response(p, mid));
    return result;
}

BruteForceResult brute_force_clear(const Scenario& scenario, double grid_step) {
    if (grid_step <= 0.0) throw ContractError("brute_force_clear: grid_step must be positive");
    const auto& sellers = scenario.sellers;
    const auto& buyers = scenario.buyers;
    if (sellers.empty() || buyers.empty())
        throw ContractError("brute_force_clear: empty market");

    // Grid for every player except the last seller, whose value is implied.
    struct Axis {
        double lo;
        double hi;
        int count;
    };
    std::vector<Axis> axes;
    double points = 1.0;
    for (const auto& p : buyers) {
        const int count = static_cast<int>(std::floor((p.d_max - p.d_min) / grid_step)) + 1;
        axes.push_back({p.d_min, p.d_max, count});
        points *= count;
    }
    for (std::size_t i = 0; i + 1 < sellers.size(); ++i) {
        const auto& p = sellers[i];
        const int count = static_cast<int>(std::floor((p.s_max - p.s_min) / grid_step)) + 1;
        axes.push_back({p.s_min, p.s_max, count});
        points *= count;
    }
    if (points > 1e7) throw ContractError("brute_force_clear: grid exceeds 1e7 points");

    const auto& last = sellers.back();
    const int last_count = static_cast<int>(std::floor((last.s_max - last.s_min) / grid_step)) + 1;

    BruteForceResult best;
    best.welfare_star = -std::numeric_limits<double>::infinity();
    bool found = false;

    std::vector<int> odo(axes.size(), 0);
    std::vector<double> demand(buyers.size()), supply(sellers.size());
    while (true) {
        double total_demand = 0.0, partial_supply = 0.0;
        for (std::size_t j = 0; j < buyers.size(); ++j) {
            demand[j] = axes[j].lo + odo[j] * grid_step;
            total_demand += demand[j];
        }
        for (std::size_t i = 0; i + 1 < sellers.size(); ++i) {
            supply[i] = axes[buyers.size() + i].lo + odo[buyers.size() + i] * grid_step;
            partial_supply += supply[i];
        }
        // Candidate grid points of the last seller nearest the balance.
        const double needed = total_demand - partial_supply;
        const double offset = (needed - last.s_min) / grid_step;
        for (int k : {static_cast<int>(std::floor(offset)), static_cast<int>(std::ceil(offset))}) {
            if (k < 0 || k >= last_count) continue;
            const double s_last = last.s_min + k * grid_step;
            if (std::abs(partial_supply + s_last - total_demand) > grid_step / 2.0 + 1e-12)
                continue;
            supply.back() = s_last;
            const double w = total_welfare(sellers, buyers, supply, demand);
            if (w > best.welfare_star) {
                best.welfare_star = w;
                best.supply = supply;
                best.demand = demand;
                found = true;
            }
        }
        // Advance odometer.
        std::size_t pos = 0;
        while (pos < axes.size() && ++odo[pos] >= axes[pos].count) {
            odo[pos] = 0;
            ++pos;
        }
        if (pos == axes.size()) break;
    }
    if (!found)
        throw InfeasibleError("brute_force_clear: no balanced allocation on the grid");
    return best;
}

PowerFlowSolution gauss_seidel_power_flow(const Network& net,
                                          const std::vector<double>& withdrawal_kw) {
    Topology topo(net);
    const int n = topo.num_buses();
    if (static_cast<int>(withdrawal_kw.size()) != n)
        throw ContractError("gauss_seidel_power_flow: withdrawal vector length mismatch");

    using cd = std::complex<double>;
    // Bus admittance matrix over slack + buses; slack occupies index n.
    auto idx = [&](int node) { return topo.is_slack(node) ? n : topo.bus_index(node); };
    Eigen::MatrixXcd y = Eigen::MatrixXcd::Zero(n + 1, n + 1);
    for (const Line& l : net.lines) {
        const cd adm = 1.0 / l.impedance;
        const int a = idx(l.from), b = idx(l.to);
        y(a, a) += adm;
        y(b, b) += adm;
        y(a, b) -= adm;
        y(b, a) -= adm;
    }

    Eigen::VectorXcd v(n + 1);
    v.setConstant(net.slack_voltage);

    PowerFlowSolution sol;
    // Sweep-to-sweep residual. Gauss-Seidel contracts slowly on deep feeders,
    // so the stop residual sits well below the 1e-8 cross-method agreement
    // this oracle is used to certify.
    constexpr double kTol = 1e-12;
    constexpr int kMaxSweeps = 200000;
    for (int sweep = 1; sweep <= kMaxSweeps; ++sweep) {
        double residual = 0.0;
        for (int i = 0; i < n; ++i) {
            // Injection current at a load bus with Q = 0.
            const double p_inj = -withdrawal_kw[i] / net.base_power;
            const cd i_inj = std::conj(p_inj / v(i));
            cd sum = 0.0;
            for (int m = 0; m <= n; ++m)
                if (m != i) sum += y(i, m) * v(m);
            const cd v_new = (i_inj - sum) / y(i, i);
            residual = std::max(residual, std::abs(v_new - v(i)));
            v(i) = v_new;
        }
        sol.iterations = sweep;
        if (residual <= kTol) {
            sol.converged = true;
            break;
        }
    }
    if (!sol.converged)
        throw PowerFlowDivergence("gauss-seidel load flow did not converge", 0.0);

    sol.voltages = v.head(n);
    sol.branch_currents.resize(n);
    sol.line_flows.resize(n);
    for (int l = 0; l < n; ++l) {
        const Line& ln = net.lines[l];
        // Orient each line so current flows away from the slack.
        int send = ln.from, recv = ln.to;
        if (!topo.is_slack(send)) {
            const auto& path_to = topo.path_lines(topo.bus_index(ln.to));
            const bool to_is_downstream = !path_to.empty() && path_to.back() == l;
            if (!to_is_downstream) std::swap(send, recv);
        }
        const cd v_send = v(idx(send));
        const cd v_recv = v(idx(recv));
        sol.branch_currents(l) = (v_send - v_recv) / ln.impedance;
        sol.line_flows[l] = std::real(v_send * std::conj(sol.branch_currents(l))) * net.base_power;
    }
    return sol;
}

}  // namespace oracle
}  // namespace tem
