#pragma once

#include <Eigen/Dense>
#include <complex>
#include <unordered_map>
#include <vector>

namespace tem {

struct Line {
    int from = 0;
    int to = 0;
    std::complex<double> impedance;  // p.u.
    double f_max = 0.0;              // kW
    double f_min = 0.0;              // kW, <= 0
};

// Radial feeder rooted at a slack bus. The slack bus is the one node that
// appears as a line endpoint but not in `buses`.
struct Network {
    std::complex<double> slack_voltage{1.0, 0.0};  // p.u.
    std::vector<int> buses;                        // node ids, slack excluded
    std::vector<Line> lines;
    double v_min = 0.95;           // p.u.
    double v_max = 1.05;           // p.u.
    double base_power = 100.0;     // kVA
    double base_voltage = 0.4;     // kV
};

struct PowerFlowSolution {
    Eigen::VectorXcd voltages;         // p.u., per bus (network order)
    Eigen::VectorXcd branch_currents;  // p.u., per line
    std::vector<double> line_flows;    // kW, sending-end active power
    bool converged = false;
    int iterations = 0;
};

struct VoltageViolation {
    int node;
    double magnitude;  // |V| p.u.
    double excess;     // signed: positive above v_max, negative below v_min
};

struct FlowViolation {
    int line_index;
    double flow;    // kW
    double excess;  // signed
};

struct ViolationReport {
    std::vector<VoltageViolation> voltage;
    std::vector<FlowViolation> flow;
    bool empty() const { return voltage.empty() && flow.empty(); }
};

// Precomputed tree structure of a radial network. Throws TopologyError when
// the line set is not a tree covering every bus from the slack.
class Topology {
public:
    explicit Topology(const Network& net);

    int slack_id() const { return slack_id_; }
    int num_buses() const { return static_cast<int>(bus_ids_.size()); }
    int bus_index(int node_id) const;          // throws ContractError on unknown id
    bool is_slack(int node_id) const { return node_id == slack_id_; }
    int parent_line(int bus_index) const { return parent_line_[bus_index]; }

    // Line indices on the slack->bus path.
    const std::vector<int>& path_lines(int bus_index) const { return path_lines_[bus_index]; }
    // Sum of |z| along the path between two nodes (either may be the slack).
    double electrical_distance(const Network& net, int node_a, int node_b) const;

private:
    int slack_id_;
    std::vector<int> bus_ids_;
    std::unordered_map<int, int> index_of_;
    std::vector<int> parent_line_;
    std::vector<std::vector<int>> path_lines_;
};

// Direct load flow with the topology matrices factored out, for repeated
// solves on a fixed network.
class DirectLoadFlow {
public:
    explicit DirectLoadFlow(const Network& net);

    const Topology& topology() const { return topo_; }
    const Eigen::MatrixXd& bibc() const { return bibc_; }

    // P is net withdrawal in kW per bus, network order.
    PowerFlowSolution solve(const std::vector<double>& withdrawal_kw) const;

private:
    Network net_;
    Topology topo_;
    Eigen::MatrixXd bibc_;
    Eigen::MatrixXcd dlf_;
    std::vector<int> send_index_;  // sending-end bus index per line, -1 for slack
};

// 0/1 downstream-membership matrix, lines x buses: [B] = [BIBC][I].
Eigen::MatrixXd build_bibc(const Network& net);

// Path-impedance matrix, buses x lines: [dV] = [BCBV][B].
Eigen::MatrixXcd build_bcbv(const Network& net);

// DLF = BCBV * BIBC, buses x buses; constant per topology.
Eigen::MatrixXcd build_dlf(const Network& net);

// Per-bus net withdrawal (kW): +d at buyer buses, -s at seller buses.
std::vector<double> injections_from_market(const std::vector<double>& supply,
                                           const std::vector<double>& demand,
                                           const std::vector<int>& seller_nodes,
                                           const std::vector<int>& buyer_nodes,
                                           const Network& net);

// Fixed-point direct load flow from a flat start. P is net withdrawal in kW,
// one entry per bus in network order. Throws PowerFlowDivergence when the
// fixed point is not reached within the iteration cap.
PowerFlowSolution solve_power_flow(const Network& net, const std::vector<double>& withdrawal_kw);

// Radial PTDF: sensitivity of line flow to bus withdrawal, exactly the BIBC
// 0/1 pattern for a tree.
Eigen::MatrixXd compute_ptdf(const Network& net);

ViolationReport check_limits(const PowerFlowSolution& sol, const Network& net);

}  // namespace tem
