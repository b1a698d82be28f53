#include "scenario.hpp"

#include <fstream>
#include <random>
#include <set>

#include <json.hpp>

#include "errors.hpp"

namespace tem {

using nlohmann::json;

Scenario generate_scenario(int n_sellers, int n_buyers, std::uint64_t seed,
                           const FeederSpec& feeder) {
    if (n_sellers < 1 || n_buyers < 1)
        throw ContractError("generate_scenario: need at least one seller and one buyer");

    Scenario s;
    s.seed = seed;
    s.label = "generated s" + std::to_string(n_sellers) + " b" + std::to_string(n_buyers) +
              " seed" + std::to_string(seed);

    const int n = n_sellers + n_buyers;
    s.network.slack_voltage = {1.0, 0.0};
    s.network.v_min = feeder.v_min;
    s.network.v_max = feeder.v_max;
    s.network.base_power = feeder.base_power;
    s.network.base_voltage = feeder.base_voltage;
    for (int bus = 1; bus <= n; ++bus) {
        s.network.buses.push_back(bus);
        Line line;
        line.from = bus - 1;  // bus 0 is the slack
        line.to = bus;
        line.impedance = {feeder.line_r, feeder.line_x};
        line.f_max = feeder.f_max;
        line.f_min = -feeder.f_max;
        s.network.lines.push_back(line);
    }

    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> a_dist(0.01, 0.9);
    std::uniform_real_distribution<double> b_dist(3.0, 8.0);
    std::uniform_real_distribution<double> omega_dist(13.0, 17.0);
    std::uniform_real_distribution<double> delta_dist(0.1, 0.9);

    // Buyers occupy the buses nearest the slack, sellers the far end.
    for (int i = 0; i < n_sellers; ++i) {
        SellerParams p;
        p.a = a_dist(rng);
        p.b = b_dist(rng);
        p.gamma = 0.0;
        // Capacity 4 kW with a free lower end: a nonzero floor would make
        // lopsided seller/buyer splits unable to balance at any price.
        p.s_min = 0.0;
        p.s_max = 4.0;
        p.node = n_buyers + 1 + i;
        s.sellers.push_back(p);
    }
    for (int j = 0; j < n_buyers; ++j) {
        BuyerParams p;
        p.omega = omega_dist(rng);
        p.delta = delta_dist(rng);
        p.d_min = 0.0;
        p.d_max = 4.0;
        p.node = 1 + j;
        s.buyers.push_back(p);
    }
    validate_scenario(s);
    return s;
}

void validate_scenario(const Scenario& s) {
    if (s.sellers.empty() || s.buyers.empty())
        throw ValidationError("scenario needs at least one seller and one buyer");
    if (s.network.v_min >= s.network.v_max)
        throw ValidationError("v_min must be below v_max");
    if (s.network.base_power <= 0.0 || s.network.base_voltage <= 0.0)
        throw ValidationError("base quantities must be positive");
    for (const Line& l : s.network.lines) {
        if (std::abs(l.impedance) <= 0.0) throw ValidationError("line impedance must be nonzero");
        if (l.f_max <= 0.0) throw ValidationError("line f_max must be positive");
        if (l.f_min > 0.0) throw ValidationError("line f_min must be <= 0");
    }
    Topology topo(s.network);  // throws TopologyError: "network not radial", cycles, ...
    for (const SellerParams& p : s.sellers) {
        if (p.a < 0.0 || p.s_min < 0.0 || p.s_min > p.s_max || p.gamma < 0.0)
            throw ValidationError("seller parameter invariant violated");
        topo.bus_index(p.node);
    }
    for (const BuyerParams& p : s.buyers) {
        if (p.omega < 0.0 || p.delta <= 0.0 || p.d_min < 0.0 || p.d_min > p.d_max)
            throw ValidationError("buyer parameter invariant violated");
        topo.bus_index(p.node);
    }
}

namespace {

void require_keys(const json& obj, const std::set<std::string>& required,
                  const std::set<std::string>& optional, const std::string& where) {
    for (const auto& key : required)
        if (!obj.contains(key)) throw ParseError(where + ": missing required field '" + key + "'");
    for (auto it = obj.begin(); it != obj.end(); ++it)
        if (!required.count(it.key()) && !optional.count(it.key()))
            throw ParseError(where + ": unknown field '" + it.key() + "'");
}

double as_number(const json& v, const std::string& where) {
    if (!v.is_number()) throw ParseError(where + ": expected a number");
    return v.get<double>();
}

std::complex<double> parse_complex(const json& v, const std::string& where) {
    if (v.is_number()) return {v.get<double>(), 0.0};
    if (v.is_array() && v.size() == 2 && v[0].is_number() && v[1].is_number())
        return {v[0].get<double>(), v[1].get<double>()};
    throw ParseError(where + ": expected a number or [re, im] pair");
}

json complex_to_json(const std::complex<double>& z) {
    if (z.imag() == 0.0) return json(z.real());
    return json::array({z.real(), z.imag()});
}

}  // namespace

Scenario load_scenario(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open scenario file: " + path);
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ParseError(std::string("scenario file is not valid JSON: ") + e.what());
    }
    if (!doc.is_object()) throw ParseError("scenario: top level must be an object");
    require_keys(doc, {"network", "sellers", "buyers"}, {"label", "seed"}, "scenario");

    Scenario s;
    if (doc.contains("label")) s.label = doc["label"].get<std::string>();
    if (doc.contains("seed")) s.seed = doc["seed"].get<std::uint64_t>();

    const json& net = doc["network"];
    require_keys(net,
                 {"slack_voltage", "buses", "lines", "v_min", "v_max", "base_power_kva",
                  "base_voltage_kv"},
                 {}, "network");
    s.network.slack_voltage = parse_complex(net["slack_voltage"], "network.slack_voltage");
    if (!net["buses"].is_array()) throw ParseError("network.buses: expected an array");
    for (const auto& b : net["buses"]) s.network.buses.push_back(b.get<int>());
    s.network.v_min = as_number(net["v_min"], "network.v_min");
    s.network.v_max = as_number(net["v_max"], "network.v_max");
    s.network.base_power = as_number(net["base_power_kva"], "network.base_power_kva");
    s.network.base_voltage = as_number(net["base_voltage_kv"], "network.base_voltage_kv");
    if (!net["lines"].is_array()) throw ParseError("network.lines: expected an array");
    for (const auto& jl : net["lines"]) {
        require_keys(jl, {"from", "to", "r", "x", "f_max"}, {"f_min"}, "line");
        Line l;
        l.from = jl["from"].get<int>();
        l.to = jl["to"].get<int>();
        l.impedance = {as_number(jl["r"], "line.r"), as_number(jl["x"], "line.x")};
        l.f_max = as_number(jl["f_max"], "line.f_max");
        l.f_min = jl.contains("f_min") ? as_number(jl["f_min"], "line.f_min") : -l.f_max;
        s.network.lines.push_back(l);
    }

    for (const auto& js : doc["sellers"]) {
        require_keys(js, {"a", "b", "gamma", "s_min", "s_max", "node"}, {}, "seller");
        SellerParams p;
        p.a = as_number(js["a"], "seller.a");
        p.b = as_number(js["b"], "seller.b");
        p.gamma = as_number(js["gamma"], "seller.gamma");
        p.s_min = as_number(js["s_min"], "seller.s_min");
        p.s_max = as_number(js["s_max"], "seller.s_max");
        p.node = js["node"].get<int>();
        s.sellers.push_back(p);
    }
    for (const auto& jb : doc["buyers"]) {
        require_keys(jb, {"omega", "delta", "d_min", "d_max", "node"}, {}, "buyer");
        BuyerParams p;
        p.omega = as_number(jb["omega"], "buyer.omega");
        p.delta = as_number(jb["delta"], "buyer.delta");
        p.d_min = as_number(jb["d_min"], "buyer.d_min");
        p.d_max = as_number(jb["d_max"], "buyer.d_max");
        p.node = jb["node"].get<int>();
        s.buyers.push_back(p);
    }

    validate_scenario(s);
    return s;
}

void save_scenario(const Scenario& s, const std::string& path) {
    json net;
    net["slack_voltage"] = complex_to_json(s.network.slack_voltage);
    net["buses"] = s.network.buses;
    net["v_min"] = s.network.v_min;
    net["v_max"] = s.network.v_max;
    net["base_power_kva"] = s.network.base_power;
    net["base_voltage_kv"] = s.network.base_voltage;
    net["lines"] = json::array();
    for (const Line& l : s.network.lines) {
        net["lines"].push_back({{"from", l.from},
                                {"to", l.to},
                                {"r", l.impedance.real()},
                                {"x", l.impedance.imag()},
                                {"f_max", l.f_max},
                                {"f_min", l.f_min}});
    }

    json doc;
    doc["label"] = s.label;
    doc["seed"] = s.seed;
    doc["network"] = net;
    doc["sellers"] = json::array();
    for (const SellerParams& p : s.sellers)
        doc["sellers"].push_back({{"a", p.a},
                                  {"b", p.b},
                                  {"gamma", p.gamma},
                                  {"s_min", p.s_min},
                                  {"s_max", p.s_max},
                                  {"node", p.node}});
    doc["buyers"] = json::array();
    for (const BuyerParams& p : s.buyers)
        doc["buyers"].push_back({{"omega", p.omega},
                                 {"delta", p.delta},
                                 {"d_min", p.d_min},
                                 {"d_max", p.d_max},
                                 {"node", p.node}});

    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    out << doc.dump(2) << '\n';
    if (!out) throw std::runtime_error("write failed: " + path);
}

std::vector<int> seller_nodes(const Scenario& s) {
    std::vector<int> nodes;
    nodes.reserve(s.sellers.size());
    for (const auto& p : s.sellers) nodes.push_back(p.node);
    return nodes;
}

std::vector<int> buyer_nodes(const Scenario& s) {
    std::vector<int> nodes;
    nodes.reserve(s.buyers.size());
    for (const auto& p : s.buyers) nodes.push_back(p.node);
    return nodes;
}

}  // namespace tem
