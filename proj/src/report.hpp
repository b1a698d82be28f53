#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "coordinator.hpp"
#include "scenario.hpp"

namespace tem {

// Per-iteration trace CSV. A non-converged run gets a trailing comment line
// carrying the converged flag.
void write_trace(const ClearingResult& result, const std::string& path);

// Final allocation per player.
void write_players(const ClearingResult& result, const std::string& path);

struct SweepRow {
    int seller_count;
    std::uint64_t seed;
    double lambda_star;
    int iterations;
    double runtime_seconds;
    bool converged;
};

// Clears one generated scenario per (seller count, seed) split of a fixed
// total player count; rows ordered by (count, seed).
std::vector<SweepRow> sweep_sellers(int total_players, const std::vector<int>& seller_counts,
                                    const std::vector<std::uint64_t>& seeds,
                                    const ClearingConfig& config);

void write_sweep(const std::vector<SweepRow>& rows, const std::string& path);

}  // namespace tem
