#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "agents.hpp"
#include "powerflow.hpp"

namespace tem {

struct Scenario {
    Network network;
    std::vector<SellerParams> sellers;
    std::vector<BuyerParams> buyers;
    std::string label;
    std::uint64_t seed = 0;
};

// Overrides for the generated chain feeder.
struct FeederSpec {
    double line_r = 0.01;          // p.u. per segment
    double line_x = 0.01;          // p.u. per segment
    double f_max = 100.0;          // kW per line
    double v_min = 0.95;
    double v_max = 1.05;
    double base_power = 100.0;     // kVA
    double base_voltage = 0.4;     // kV
};

// Seeded random scenario on a chain feeder: buyers on buses 1..n_buyers,
// sellers on the remaining buses at the far end. Deterministic per
// (n_sellers, n_buyers, seed).
Scenario generate_scenario(int n_sellers, int n_buyers, std::uint64_t seed,
                           const FeederSpec& feeder = {});

// Structural checks shared by generation and file loading. Throws
// ValidationError (and TopologyError for a bad network).
void validate_scenario(const Scenario& s);

// JSON document round trip. load throws ParseError / ValidationError.
Scenario load_scenario(const std::string& path);
void save_scenario(const Scenario& s, const std::string& path);

std::vector<int> seller_nodes(const Scenario& s);
std::vector<int> buyer_nodes(const Scenario& s);

}  // namespace tem
