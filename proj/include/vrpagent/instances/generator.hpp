#pragma once

#include "vrpagent/model/instance.hpp"

#include <cstdint>
#include <stdexcept>

namespace vrpagent {

class GenerationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/**
 * Random instance parameters.
 *
 * Coordinates (depot included) are uniform in the unit square. Demands are
 * uniform integers in [demand_lo, demand_hi]. VRPTW windows have width uniform
 * in [tw_width_lo, tw_width_hi] and are placed so that a direct drive from the
 * depot is on time and the vehicle can still return by `horizon`. PCVRP prizes
 * are uniform in (prize_lo, prize_hi].
 */
struct GenParams {
    ProblemKind kind = ProblemKind::CVRP;
    int n = 100;
    std::uint64_t seed = 0;
    int capacity = 50;
    int demand_lo = 1;
    int demand_hi = 9;
    double horizon = 4.6;
    double tw_width_lo = 0.1;
    double tw_width_hi = 0.3;
    double service_time = 0.2;
    double prize_lo = 0.0;
    double prize_hi = 0.1;

    /// Throws std::invalid_argument when the parameters break their invariants.
    void check() const;
};

/// Deterministic in `params` (including the seed) on every platform.
Instance generate(const GenParams& params);

} // namespace vrpagent
