#pragma once

#include <vector>

namespace tem {

// Quadratic-cost seller. Cost in $, power in kW, prices in $/kWh.
struct SellerParams {
    double a = 0.0;      // cost curvature
    double b = 0.0;      // marginal cost intercept
    double gamma = 0.0;  // fixed cost
    double s_min = 0.0;
    double s_max = 0.0;
    int node = 0;
};

// Saturating-quadratic-utility buyer.
struct BuyerParams {
    double omega = 0.0;  // marginal utility intercept
    double delta = 0.0;  // utility curvature, > 0
    double d_min = 0.0;
    double d_max = 0.0;
    int node = 0;
};

// a*s^2 + b*s + gamma. Throws ContractError for s < 0.
double seller_cost(const SellerParams& p, double s);

// omega*d - delta*d^2 below the saturation point omega/(2*delta),
// constant omega^2/(4*delta) beyond it. Continuous at the junction.
// Throws ContractError for d < 0.
double buyer_utility(const BuyerParams& p, double d);

// argmax over [s_min, s_max] of s*price - cost(s). Closed form.
// For a == 0 the response is bang-bang; ties go to s_min.
double seller_best_response(const SellerParams& p, double effective_price);

// argmax over [d_min, d_max] of utility(d) - d*price. Closed form.
// For price <= 0 the maximizer is the saturation point, clamped.
double buyer_best_response(const BuyerParams& p, double effective_price);

// Sum of buyer utilities minus sum of seller costs.
double total_welfare(const std::vector<SellerParams>& sellers,
                     const std::vector<BuyerParams>& buyers,
                     const std::vector<double>& supply,
                     const std::vector<double>& demand);

}  // namespace tem
