#include "powerflow.hpp"

#include <algorithm>
#include <queue>
#include <set>
#include <string>

#include "errors.hpp"

namespace tem {

namespace {
constexpr double kPfTolerance = 1e-10;  // p.u.
constexpr int kPfMaxIterations = 100;
}  // namespace

Topology::Topology(const Network& net) {
    const int n = static_cast<int>(net.buses.size());
    if (static_cast<int>(net.lines.size()) != n)
        throw TopologyError("network not radial: line count != bus count");

    bus_ids_ = net.buses;
    for (int i = 0; i < n; ++i) {
        if (!index_of_.emplace(bus_ids_[i], i).second)
            throw TopologyError("duplicate bus id " + std::to_string(bus_ids_[i]));
    }

    // The slack is the unique endpoint that is not a listed bus.
    std::set<int> slack_candidates;
    for (const Line& l : net.lines) {
        if (!index_of_.count(l.from)) slack_candidates.insert(l.from);
        if (!index_of_.count(l.to)) slack_candidates.insert(l.to);
    }
    if (slack_candidates.size() != 1)
        throw TopologyError("expected exactly one slack endpoint, found " +
                            std::to_string(slack_candidates.size()));
    slack_id_ = *slack_candidates.begin();

    // BFS from the slack over the undirected line graph.
    std::unordered_map<int, std::vector<std::pair<int, int>>> adj;  // node -> (neighbor, line)
    for (int l = 0; l < n; ++l) {
        adj[net.lines[l].from].push_back({net.lines[l].to, l});
        adj[net.lines[l].to].push_back({net.lines[l].from, l});
    }

    parent_line_.assign(n, -1);
    std::vector<bool> seen(n, false);
    std::queue<int> frontier;
    frontier.push(slack_id_);
    int reached = 0;
    while (!frontier.empty()) {
        const int node = frontier.front();
        frontier.pop();
        const int entry_line = node == slack_id_ ? -1 : parent_line_[index_of_.at(node)];
        for (auto [nbr, line] : adj[node]) {
            if (line == entry_line) continue;
            if (nbr == slack_id_ || (nbr != slack_id_ && seen[index_of_.at(nbr)]))
                throw TopologyError("cycle detected in network");
            const int idx = index_of_.at(nbr);
            seen[idx] = true;
            parent_line_[idx] = line;
            ++reached;
            frontier.push(nbr);
        }
    }
    if (reached != n) throw TopologyError("disconnected bus: not every bus reachable from slack");

    path_lines_.resize(n);
    for (int i = 0; i < n; ++i) {
        int node = bus_ids_[i];
        std::vector<int> path;
        while (node != slack_id_) {
            const int idx = index_of_.at(node);
            const int l = parent_line_[idx];
            path.push_back(l);
            const Line& ln = net.lines[l];
            node = (ln.from == node) ? ln.to : ln.from;
        }
        std::reverse(path.begin(), path.end());
        path_lines_[i] = std::move(path);
    }
}

int Topology::bus_index(int node_id) const {
    auto it = index_of_.find(node_id);
    if (it == index_of_.end())
        throw ContractError("unknown node id " + std::to_string(node_id));
    return it->second;
}

double Topology::electrical_distance(const Network& net, int node_a, int node_b) const {
    auto lines_to_root = [&](int node) -> std::vector<int> {
        if (node == slack_id_) return {};
        return path_lines_[bus_index(node)];
    };
    const std::vector<int> pa = lines_to_root(node_a);
    const std::vector<int> pb = lines_to_root(node_b);
    // Shared prefix from the slack is the path to the LCA.
    std::size_t common = 0;
    while (common < pa.size() && common < pb.size() && pa[common] == pb[common]) ++common;
    double dist = 0.0;
    for (std::size_t i = common; i < pa.size(); ++i) dist += std::abs(net.lines[pa[i]].impedance);
    for (std::size_t i = common; i < pb.size(); ++i) dist += std::abs(net.lines[pb[i]].impedance);
    return dist;
}

Eigen::MatrixXd build_bibc(const Network& net) {
    Topology topo(net);
    const int n = topo.num_buses();
    Eigen::MatrixXd bibc = Eigen::MatrixXd::Zero(n, n);
    for (int bus = 0; bus < n; ++bus)
        for (int line : topo.path_lines(bus)) bibc(line, bus) = 1.0;
    return bibc;
}

Eigen::MatrixXcd build_bcbv(const Network& net) {
    Topology topo(net);
    const int n = topo.num_buses();
    Eigen::MatrixXcd bcbv = Eigen::MatrixXcd::Zero(n, n);
    for (int bus = 0; bus < n; ++bus)
        for (int line : topo.path_lines(bus)) bcbv(bus, line) = net.lines[line].impedance;
    return bcbv;
}

Eigen::MatrixXcd build_dlf(const Network& net) {
    return build_bcbv(net) * build_bibc(net);
}

std::vector<double> injections_from_market(const std::vector<double>& supply,
                                           const std::vector<double>& demand,
                                           const std::vector<int>& seller_nodes,
                                           const std::vector<int>& buyer_nodes,
                                           const Network& net) {
    if (supply.size() != seller_nodes.size() || demand.size() != buyer_nodes.size())
        throw ContractError("injections_from_market: vector length mismatch");
    Topology topo(net);
    std::vector<double> withdrawal(topo.num_buses(), 0.0);
    for (std::size_t j = 0; j < demand.size(); ++j)
        withdrawal[topo.bus_index(buyer_nodes[j])] += demand[j];
    for (std::size_t i = 0; i < supply.size(); ++i)
        withdrawal[topo.bus_index(seller_nodes[i])] -= supply[i];
    return withdrawal;
}

DirectLoadFlow::DirectLoadFlow(const Network& net)
    : net_(net), topo_(net), bibc_(build_bibc(net)), dlf_(build_bcbv(net) * bibc_) {
    const int n = topo_.num_buses();
    send_index_.resize(n);
    for (int l = 0; l < n; ++l) {
        const Line& ln = net_.lines[l];
        // Sending end is the slack-side endpoint.
        int send = ln.from;
        if (!topo_.is_slack(ln.from) && !topo_.is_slack(ln.to)) {
            const auto& path_to = topo_.path_lines(topo_.bus_index(ln.to));
            const bool to_is_downstream = !path_to.empty() && path_to.back() == l;
            send = to_is_downstream ? ln.from : ln.to;
        } else if (topo_.is_slack(ln.to)) {
            send = ln.to;
        }
        send_index_[l] = topo_.is_slack(send) ? -1 : topo_.bus_index(send);
    }
}

PowerFlowSolution DirectLoadFlow::solve(const std::vector<double>& withdrawal_kw) const {
    const int n = topo_.num_buses();
    if (static_cast<int>(withdrawal_kw.size()) != n)
        throw ContractError("solve_power_flow: withdrawal vector length mismatch");

    Eigen::VectorXd p_pu(n);
    for (int i = 0; i < n; ++i) p_pu(i) = withdrawal_kw[i] / net_.base_power;

    const std::complex<double> v0 = net_.slack_voltage;
    Eigen::VectorXcd v = Eigen::VectorXcd::Constant(n, v0);
    Eigen::VectorXcd currents(n);

    PowerFlowSolution sol;
    double residual = 0.0;
    for (int it = 1; it <= kPfMaxIterations; ++it) {
        for (int i = 0; i < n; ++i)
            currents(i) = std::conj(p_pu(i) / v(i));  // withdrawal current, Q = 0
        Eigen::VectorXcd v_next = Eigen::VectorXcd::Constant(n, v0) - dlf_ * currents;
        residual = (v_next - v).cwiseAbs().maxCoeff();
        v = v_next;
        sol.iterations = it;
        if (residual <= kPfTolerance) {
            sol.converged = true;
            break;
        }
    }
    if (!sol.converged)
        throw PowerFlowDivergence("power flow did not converge; last residual " +
                                      std::to_string(residual) + " p.u.",
                                  residual);

    sol.voltages = v;
    for (int i = 0; i < n; ++i) currents(i) = std::conj(p_pu(i) / v(i));
    sol.branch_currents = bibc_.cast<std::complex<double>>() * currents;

    sol.line_flows.resize(n);
    for (int l = 0; l < n; ++l) {
        const std::complex<double> v_send = send_index_[l] < 0 ? v0 : v(send_index_[l]);
        sol.line_flows[l] =
            std::real(v_send * std::conj(sol.branch_currents(l))) * net_.base_power;
    }
    return sol;
}

PowerFlowSolution solve_power_flow(const Network& net, const std::vector<double>& withdrawal_kw) {
    return DirectLoadFlow(net).solve(withdrawal_kw);
}

Eigen::MatrixXd compute_ptdf(const Network& net) {
    return build_bibc(net);
}

ViolationReport check_limits(const PowerFlowSolution& sol, const Network& net) {
    ViolationReport report;
    for (int i = 0; i < static_cast<int>(net.buses.size()); ++i) {
        const double mag = std::abs(sol.voltages(i));
        if (mag > net.v_max)
            report.voltage.push_back({net.buses[i], mag, mag - net.v_max});
        else if (mag < net.v_min)
            report.voltage.push_back({net.buses[i], mag, mag - net.v_min});
    }
    for (std::size_t l = 0; l < sol.line_flows.size(); ++l) {
        const double f = sol.line_flows[l];
        if (f > net.lines[l].f_max)
            report.flow.push_back({static_cast<int>(l), f, f - net.lines[l].f_max});
        else if (f < net.lines[l].f_min)
            report.flow.push_back({static_cast<int>(l), f, f - net.lines[l].f_min});
    }
    return report;
}

}  // namespace tem
