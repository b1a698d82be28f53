#pragma once

#include <tuple>
#include <vector>

#include "agents.hpp"
#include "powerflow.hpp"
#include "scenario.hpp"

namespace tem {

struct ClearingConfig {
    double xi = 0.01;          // price step, $/kWh per kW
    double sigma_v = 1.0;      // voltage price coefficient
    double sigma_f = 0.001;    // flow price coefficient, per kW
    double lambda0 = 20.0;     // initial price
    double eps_balance = -1.0; // kW; <= 0 means 0.1% of total d_max
    double eps_price = 1e-4;   // $/kWh
    int max_iterations = 5000;
    bool network_signals = true;
};

struct TraceRecord {
    int iteration;
    double lambda;
    double total_supply;
    double total_demand;
    double mismatch;          // supply - demand, kW
    double min_voltage;       // p.u.
    double max_voltage;       // p.u.
    double max_line_loading;  // percent of f_max
    double omega_total;
    double rho_total;
    double transfer_imbalance;
};

struct PlayerRow {
    int player_id;
    bool is_seller;
    int node;
    double allocation;       // kW
    double effective_price;  // $/kWh
};

struct ClearingResult {
    double lambda_star = 0.0;
    std::vector<double> supply;
    std::vector<double> demand;
    int iterations = 0;
    bool converged = false;
    std::vector<TraceRecord> trace;
    PowerFlowSolution final_solution;
    std::vector<PlayerRow> players;
};

// Dual price step: excess supply lowers the price, projected at zero.
double update_price(double lambda, double total_supply, double total_demand, double xi);

// Seller with the smallest electrical distance (sum of |z| on the tree path)
// to the violating node; ties go to the lowest seller bus id.
int nearest_seller(const Network& net, int violating_node,
                   const std::vector<SellerParams>& sellers);
int nearest_seller(const Network& net, const Topology& topo, int violating_node,
                   const std::vector<SellerParams>& sellers);

// Per-seller voltage management prices: negative under over-voltage,
// positive under under-voltage, routed to the nearest seller. Violations
// mapping to one seller accumulate.
std::vector<double> voltage_price_signals(const PowerFlowSolution& sol, const Network& net,
                                          double lambda, double sigma_v,
                                          const std::vector<SellerParams>& sellers);
std::vector<double> voltage_price_signals(const PowerFlowSolution& sol, const Network& net,
                                          const Topology& topo, double lambda, double sigma_v,
                                          const std::vector<SellerParams>& sellers);

// Per-buyer congestion surcharges: every buyer downstream of an overloaded
// line pays sigma_f * lambda * (F - f_max); overloads accumulate.
std::vector<double> congestion_price_signals(const PowerFlowSolution& sol,
                                             const Eigen::MatrixXd& ptdf, const Network& net,
                                             double lambda, double sigma_f,
                                             const std::vector<BuyerParams>& buyers);

// Enforce budget balance between the two signal families by scaling rho
// when a positive scaling factor exists; otherwise report the residual.
std::tuple<std::vector<double>, std::vector<double>, double> balance_transfers(
    const std::vector<double>& omega_signal, const std::vector<double>& rho_signal);

// The full clearing loop: broadcast price + signals, collect best responses,
// solve the load flow, derive violation prices, step the price. Throws
// InfeasibleError, PowerFlowDivergence or StepSizeError.
ClearingResult clear_market(const Scenario& scenario, const ClearingConfig& config);

// Convergence tolerances on constraint violations.
constexpr double kVoltageViolationTol = 1e-3;   // p.u.
constexpr double kFlowViolationTolFrac = 0.005; // fraction of f_max

double resolve_eps_balance(const Scenario& scenario, const ClearingConfig& config);

}  // namespace tem
