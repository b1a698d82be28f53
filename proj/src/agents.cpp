#include "agents.hpp"

#include <algorithm>

#include "errors.hpp"

namespace tem {

namespace {
double clamp(double x, double lo, double hi) { return std::min(std::max(x, lo), hi); }
}  // namespace

double seller_cost(const SellerParams& p, double s) {
    if (s < 0.0) throw ContractError("seller_cost: negative supply");
    return p.a * s * s + p.b * s + p.gamma;
}

double buyer_utility(const BuyerParams& p, double d) {
    if (d < 0.0) throw ContractError("buyer_utility: negative demand");
    const double sat = p.omega / (2.0 * p.delta);
    if (d < sat) return p.omega * d - p.delta * d * d;
    return p.omega * p.omega / (4.0 * p.delta);
}

double seller_best_response(const SellerParams& p, double effective_price) {
    if (p.a > 0.0) {
        return clamp((effective_price - p.b) / (2.0 * p.a), p.s_min, p.s_max);
    }
    // Linear cost: bang-bang, tie at marginal cost goes to the lower bound.
    return effective_price > p.b ? p.s_max : p.s_min;
}

double buyer_best_response(const BuyerParams& p, double effective_price) {
    if (effective_price > 0.0) {
        return clamp((p.omega - effective_price) / (2.0 * p.delta), p.d_min, p.d_max);
    }
    // Free (or subsidized) energy: smallest consumption on the utility plateau.
    return clamp(p.omega / (2.0 * p.delta), p.d_min, p.d_max);
}

double total_welfare(const std::vector<SellerParams>& sellers,
                     const std::vector<BuyerParams>& buyers,
                     const std::vector<double>& supply,
                     const std::vector<double>& demand) {
    if (supply.size() != sellers.size() || demand.size() != buyers.size())
        throw ContractError("total_welfare: vector length mismatch");
    double w = 0.0;
    for (std::size_t j = 0; j < buyers.size(); ++j) w += buyer_utility(buyers[j], demand[j]);
    for (std::size_t i = 0; i < sellers.size(); ++i) w -= seller_cost(sellers[i], supply[i]);
    return w;
}

}  // namespace tem
