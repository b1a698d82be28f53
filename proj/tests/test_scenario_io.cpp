#include <doctest.h>

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "coordinator.hpp"
#include "errors.hpp"
#include "helpers.hpp"
#include "report.hpp"
#include "scenario.hpp"

using namespace tem;

namespace {

struct TempFile {
    std::string path;
    explicit TempFile(const std::string& name) {
        path = std::string(std::getenv("TMPDIR") ? std::getenv("TMPDIR") : "/tmp") + "/" + name;
    }
    ~TempFile() { std::remove(path.c_str()); }
};

std::string slurp(const std::string& path) {
    std::ifstream in(path);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

TEST_CASE("generation is deterministic and respects the parameter intervals") {
    const Scenario a = generate_scenario(25, 25, 42);
    const Scenario b = generate_scenario(25, 25, 42);
    CHECK(a.network.buses.size() == 50);
    CHECK(a.network.lines.size() == 50);
    REQUIRE(a.sellers.size() == 25);
    REQUIRE(a.buyers.size() == 25);
    for (std::size_t i = 0; i < 25; ++i) {
        CHECK(a.sellers[i].a == b.sellers[i].a);
        CHECK(a.sellers[i].b == b.sellers[i].b);
        CHECK(a.buyers[i].omega == b.buyers[i].omega);
        CHECK(a.buyers[i].delta == b.buyers[i].delta);

        CHECK(a.sellers[i].a >= 0.01);
        CHECK(a.sellers[i].a <= 0.9);
        CHECK(a.sellers[i].b >= 3.0);
        CHECK(a.sellers[i].b <= 8.0);
        CHECK(a.sellers[i].gamma == 0.0);
        CHECK(a.sellers[i].s_min == 0.0);
        CHECK(a.sellers[i].s_max == 4.0);
        CHECK(a.buyers[i].d_min == 0.0);
        CHECK(a.buyers[i].d_max == 4.0);
        CHECK(a.buyers[i].omega >= 13.0);
        CHECK(a.buyers[i].omega <= 17.0);
        CHECK(a.buyers[i].delta >= 0.1);
        CHECK(a.buyers[i].delta <= 0.9);
        // Buyers sit near the slack, sellers at the far end.
        CHECK(a.buyers[i].node == static_cast<int>(i) + 1);
        CHECK(a.sellers[i].node == static_cast<int>(i) + 26);
    }
    CHECK_NOTHROW(validate_scenario(a));
    CHECK(generate_scenario(1, 1, 0).sellers.size() == 1);
    CHECK_THROWS_AS(generate_scenario(0, 1, 0), ContractError);
}

TEST_CASE("different seeds give different draws") {
    const Scenario a = generate_scenario(3, 3, 1);
    const Scenario b = generate_scenario(3, 3, 2);
    CHECK(a.sellers[0].a != b.sellers[0].a);
}

TEST_CASE("scenario file round trip") {
    const Scenario original = generate_scenario(25, 25, 7);
    TempFile file("tem_roundtrip.json");
    save_scenario(original, file.path);
    const Scenario loaded = load_scenario(file.path);
    CHECK(loaded.label == original.label);
    CHECK(loaded.seed == original.seed);
    CHECK(loaded.network.buses == original.network.buses);
    REQUIRE(loaded.sellers.size() == original.sellers.size());
    REQUIRE(loaded.buyers.size() == original.buyers.size());
    for (std::size_t i = 0; i < original.sellers.size(); ++i) {
        CHECK(loaded.sellers[i].a == original.sellers[i].a);
        CHECK(loaded.sellers[i].b == original.sellers[i].b);
        CHECK(loaded.sellers[i].node == original.sellers[i].node);
    }
    for (std::size_t l = 0; l < original.network.lines.size(); ++l) {
        CHECK(loaded.network.lines[l].impedance == original.network.lines[l].impedance);
        CHECK(loaded.network.lines[l].f_max == original.network.lines[l].f_max);
    }
}

TEST_CASE("malformed scenario files") {
    TempFile file("tem_bad.json");
    SUBCASE("missing required field") {
        std::ofstream(file.path) << R"({"network": {}, "sellers": []})";
        CHECK_THROWS_AS(load_scenario(file.path), ParseError);
    }
    SUBCASE("unknown key rejected") {
        Scenario s = generate_scenario(1, 1, 3);
        save_scenario(s, file.path);
        std::string text = slurp(file.path);
        text.insert(text.rfind('}'), R"(, "mystery": 1)");
        std::ofstream(file.path) << text;
        CHECK_THROWS_AS(load_scenario(file.path), ParseError);
    }
    SUBCASE("cycle in lines fails validation") {
        std::ofstream(file.path) << R"({
          "network": {"slack_voltage": 1.0, "buses": [1, 2],
            "lines": [
              {"from": 0, "to": 1, "r": 0.01, "x": 0.0, "f_max": 100},
              {"from": 1, "to": 2, "r": 0.01, "x": 0.0, "f_max": 100},
              {"from": 2, "to": 1, "r": 0.01, "x": 0.0, "f_max": 100}],
            "v_min": 0.95, "v_max": 1.05, "base_power_kva": 100, "base_voltage_kv": 0.4},
          "sellers": [{"a": 0.1, "b": 5, "gamma": 0, "s_min": 0, "s_max": 4, "node": 2}],
          "buyers": [{"omega": 15, "delta": 0.5, "d_min": 0, "d_max": 4, "node": 1}]})";
        CHECK_THROWS_AS(load_scenario(file.path), TopologyError);
    }
    SUBCASE("missing file") {
        CHECK_THROWS_AS(load_scenario("/nonexistent/path.json"), ParseError);
    }
}

TEST_CASE("trace CSV layout") {
    const Scenario s = tem::testing::scenario_1x1();
    ClearingConfig cfg;
    cfg.network_signals = false;

    SUBCASE("converged run ends within tolerance") {
        const ClearingResult r = clear_market(s, cfg);
        TempFile trace("tem_trace.csv");
        write_trace(r, trace.path);
        const std::string text = slurp(trace.path);
        CHECK(text.rfind("iteration,lambda,total_supply_kw,total_demand_kw,mismatch_kw,"
                         "min_voltage_pu,max_voltage_pu,max_line_loading_pct,omega_total,"
                         "rho_total,transfer_imbalance\n", 0) == 0);
        CHECK(text.find("# converged") == std::string::npos);
        // One data row per iteration.
        const auto rows = std::count(text.begin(), text.end(), '\n') - 1;
        CHECK(rows == r.iterations);
        CHECK(std::abs(r.trace.back().mismatch) <= resolve_eps_balance(s, cfg));

        TempFile players("tem_players.csv");
        write_players(r, players.path);
        const std::string ptext = slurp(players.path);
        CHECK(ptext.rfind("player_id,role,node,allocation_kw,effective_price\n", 0) == 0);
        CHECK(ptext.find("seller") != std::string::npos);
        CHECK(ptext.find("buyer") != std::string::npos);
    }

    SUBCASE("non-converged run carries a trailing comment") {
        cfg.max_iterations = 2;
        const ClearingResult r = clear_market(s, cfg);
        TempFile trace("tem_trace2.csv");
        write_trace(r, trace.path);
        const std::string text = slurp(trace.path);
        CHECK(text.find("# converged=false") != std::string::npos);
    }

    SUBCASE("empty result gives a header-only file") {
        ClearingResult empty;
        empty.converged = true;
        TempFile trace("tem_trace3.csv");
        write_trace(empty, trace.path);
        const std::string text = slurp(trace.path);
        CHECK(std::count(text.begin(), text.end(), '\n') == 1);
    }
}

TEST_CASE("seller sweep") {
    ClearingConfig cfg;
    cfg.network_signals = false;
    SUBCASE("single count single seed") {
        const auto rows = sweep_sellers(10, {5}, {1}, cfg);
        REQUIRE(rows.size() == 1);
        CHECK(rows[0].seller_count == 5);
        CHECK(rows[0].converged);
        CHECK(rows[0].lambda_star > 0.0);
    }
    SUBCASE("count equal to total is rejected") {
        CHECK_THROWS_AS(sweep_sellers(10, {10}, {1}, cfg), ContractError);
    }
    SUBCASE("csv output ordered by count then seed") {
        const auto rows = sweep_sellers(6, {2, 3}, {1, 2}, cfg);
        REQUIRE(rows.size() == 4);
        CHECK(rows[0].seller_count == 2);
        CHECK(rows[3].seller_count == 3);
        TempFile file("tem_sweep.csv");
        write_sweep(rows, file.path);
        CHECK(slurp(file.path).rfind("seller_count,seed,lambda_star,iterations,runtime_s,"
                                     "converged\n", 0) == 0);
    }
}
