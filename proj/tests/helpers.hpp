#pragma once

#include <complex>
#include <random>

#include "scenario.hpp"

namespace tem::testing {

// Chain feeder slack(0) - 1 - 2 - ... - n with uniform impedance and
// deliberately wide limits unless tightened by the caller.
inline Network chain_network(int n, std::complex<double> z = {0.01, 0.01},
                             double f_max = 1e6, double v_min = 0.5, double v_max = 1.5) {
    Network net;
    net.v_min = v_min;
    net.v_max = v_max;
    for (int bus = 1; bus <= n; ++bus) {
        net.buses.push_back(bus);
        net.lines.push_back({bus - 1, bus, z, f_max, -f_max});
    }
    return net;
}

// Slack with leaf buses 1..n on separate lines.
inline Network star_network(const std::vector<std::complex<double>>& impedances) {
    Network net;
    net.v_min = 0.5;
    net.v_max = 1.5;
    for (std::size_t i = 0; i < impedances.size(); ++i) {
        const int bus = static_cast<int>(i) + 1;
        net.buses.push_back(bus);
        net.lines.push_back({0, bus, impedances[i], 1e6, -1e6});
    }
    return net;
}

// Random tree: bus i attaches to a uniformly chosen earlier node.
inline Network random_tree_network(std::mt19937_64& rng, int n) {
    Network net;
    net.v_min = 0.5;
    net.v_max = 1.5;
    std::uniform_real_distribution<double> r_dist(0.001, 0.02);
    for (int bus = 1; bus <= n; ++bus) {
        std::uniform_int_distribution<int> parent_dist(0, bus - 1);
        const int parent = parent_dist(rng);
        net.buses.push_back(bus);
        net.lines.push_back({parent, bus, {r_dist(rng), r_dist(rng)}, 1e6, -1e6});
    }
    return net;
}

// The hand-analyzable one seller / one buyer market: clears at price 10 with
// 5 kW traded.
inline Scenario scenario_1x1() {
    Scenario s;
    s.network = chain_network(2);
    s.label = "1x1 analytic";
    s.sellers.push_back({0.5, 5.0, 0.0, 0.0, 10.0, 2});
    s.buyers.push_back({15.0, 0.5, 0.0, 20.0, 1});
    return s;
}

}  // namespace tem::testing
