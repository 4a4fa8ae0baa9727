#pragma once

#include "vrpagent/model/instance.hpp"
#include "vrpagent/model/solution.hpp"

#include <string>
#include <string_view>
#include <vector>

namespace vrpagent {

enum class ViolationKind { capacity, time_window, duplicate, missing, invalid_id, empty_tour, cache_drift, mapping };

std::string_view to_string(ViolationKind kind);

struct Violation {
    ViolationKind kind;
    int tour = -1;  // -1 when not tied to one tour
    std::string detail;
};

struct FeasibilityReport {
    bool feasible = true;
    std::vector<Violation> violations;

    void add(ViolationKind kind, int tour, std::string detail) {
        feasible = false;
        violations.push_back({kind, tour, std::move(detail)});
    }
    bool has(ViolationKind kind) const;
};

/// Tolerance used when comparing caches against recomputed values.
inline constexpr double kCacheTolerance = 1e-6;

/// Time-window slack tolerated by the validator.
inline constexpr double kTimeTolerance = 1e-9;

/**
 * Checks raw customer lists against the instance: id range, duplicates,
 * coverage (all customers must be served unless the instance is PCVRP),
 * capacity, and for VRPTW a forward simulation with waiting.
 */
FeasibilityReport validate_routes(const Instance& instance, const std::vector<std::vector<int>>& tours);

/// validate_routes plus cache coherence: tour demand/cost, customer index,
/// unassigned set and the cached objective.
FeasibilityReport validate(const Solution& solution, const Instance& instance);
inline FeasibilityReport validate(const Solution& solution) { return validate(solution, solution.instance()); }

/// Objective recomputed from coordinates. Throws StructureError on duplicate or
/// out-of-range ids.
double objective(const Instance& instance, const std::vector<std::vector<int>>& tours);

/// From-scratch objective of `solution`. Throws StructureError when the
/// customer index disagrees with the tours.
double objective(const Solution& solution, const Instance& instance);

/// dist(0,c1) + ... + dist(c_last,0) summed left to right.
double route_cost(const Instance& instance, std::span<const int> customers);

} // namespace vrpagent
