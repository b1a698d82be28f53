#pragma once

#include <vector>

#include "powerflow.hpp"
#include "scenario.hpp"

namespace tem {
namespace oracle {

struct CentralizedResult {
    double lambda_star;
    std::vector<double> supply;
    std::vector<double> demand;
};

struct BruteForceResult {
    double welfare_star;
    std::vector<double> supply;
    std::vector<double> demand;
};

// Welfare-maximizing clearing by bisection on the price of the balance
// constraint. The excess-supply curve is nondecreasing, so the crossing is
// unique. Throws InfeasibleError when there is no sign change.
CentralizedResult centralized_clear(const Scenario& scenario);

// Signed total best-response excess supply at a given price.
double excess_supply(const Scenario& scenario, double lambda);

// Exhaustive grid search over allocations with |sum(S) - sum(D)| <= step/2.
// The last seller's value is pinned by the balance, so the enumerated set is
// the grid of all other players. Intended for desk-scale instances; throws
// ContractError when the enumeration exceeds 1e7 points and InfeasibleError
// when no balanced grid point exists.
BruteForceResult brute_force_clear(const Scenario& scenario, double grid_step);

// Classical bus-admittance Gauss-Seidel load flow; same sign conventions as
// solve_power_flow, used as an independent cross-check.
PowerFlowSolution gauss_seidel_power_flow(const Network& net,
                                          const std::vector<double>& withdrawal_kw);

}  // namespace oracle
}  // namespace tem
