#pragma once

// Test-only reference computations. Everything here works from raw node data
// (coordinates, demands, windows) and rebuilds routes from scratch, so it shares
// no code path with the incremental caches under test.

#include "vrpagent/model/instance.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <vector>

namespace oracle {

using vrpagent::Instance;

inline double euclid(const Instance& inst, int a, int b) {
    double dx = inst.node(a).x - inst.node(b).x;
    double dy = inst.node(a).y - inst.node(b).y;
    return std::sqrt(dx * dx + dy * dy);
}

inline double route_cost(const Instance& inst, const std::vector<int>& route) {
    double cost = 0.0;
    int prev = 0;
    for (int c : route) {
        cost += euclid(inst, prev, c);
        prev = c;
    }
    return cost + euclid(inst, prev, 0);
}

/// Capacity plus forward time simulation with waiting (no tolerance).
inline bool route_feasible(const Instance& inst, const std::vector<int>& route) {
    long demand = 0;
    for (int c : route) {
        demand += inst.node(c).demand;
    }
    if (demand > inst.capacity()) {
        return false;
    }
    if (inst.kind() != vrpagent::ProblemKind::VRPTW) {
        return true;
    }
    double t = 0.0;
    int prev = 0;
    for (int c : route) {
        double arrive = t + euclid(inst, prev, c);
        double start = std::max(arrive, inst.node(c).tw_start);
        if (start > inst.node(c).tw_end) {
            return false;
        }
        t = start + inst.node(c).service_time;
        prev = c;
    }
    return true;
}

inline double total_objective(const Instance& inst, const std::vector<std::vector<int>>& tours) {
    std::vector<char> served(static_cast<std::size_t>(inst.num_nodes()), 0);
    double total = 0.0;
    for (const auto& r : tours) {
        total += route_cost(inst, r);
        for (int c : r) {
            served[static_cast<std::size_t>(c)] = 1;
        }
    }
    if (inst.kind() == vrpagent::ProblemKind::PCVRP) {
        for (int c = 1; c < inst.num_nodes(); ++c) {
            if (!served[static_cast<std::size_t>(c)]) {
                total += inst.node(c).prize;
            }
        }
    }
    return total;
}

/// Objective change of splicing `customer` into tours[t] at `pos` (t ==
/// tours.size() opens a new tour), by rebuilding the tour and re-timing it.
inline std::optional<double> insertion_delta(const Instance& inst, const std::vector<std::vector<int>>& tours,
                                             int customer, std::size_t t, std::size_t pos) {
    std::vector<int> before = t < tours.size() ? tours[t] : std::vector<int>{};
    std::vector<int> after = before;
    after.insert(after.begin() + static_cast<std::ptrdiff_t>(pos), customer);
    if (!route_feasible(inst, after)) {
        return std::nullopt;
    }
    double before_cost = before.empty() ? 0.0 : route_cost(inst, before);
    double prize = inst.kind() == vrpagent::ProblemKind::PCVRP ? inst.node(customer).prize : 0.0;
    return route_cost(inst, after) - before_cost - prize;
}

struct Choice {
    std::size_t tour = 0;
    std::size_t pos = 0;
    double delta = std::numeric_limits<double>::infinity();
    bool found = false;
};

/// Exhaustive argmin over all (tour, position) plus the new tour; the lowest
/// (tour, position) among candidates within `tie` of the minimum wins.
inline Choice best_insertion(const Instance& inst, const std::vector<std::vector<int>>& tours, int customer,
                             double tie = 1e-9) {
    struct Cand {
        std::size_t t, p;
        double d;
    };
    std::vector<Cand> all;
    for (std::size_t t = 0; t <= tours.size(); ++t) {
        std::size_t len = t < tours.size() ? tours[t].size() : 0;
        for (std::size_t p = 0; p <= len; ++p) {
            if (auto d = insertion_delta(inst, tours, customer, t, p)) {
                all.push_back({t, p, *d});
            }
        }
    }
    Choice best;
    if (all.empty()) {
        return best;
    }
    double m = std::numeric_limits<double>::infinity();
    for (const auto& c : all) {
        m = std::min(m, c.d);
    }
    for (const auto& c : all) {
        if (c.d <= m + tie) {
            return {c.t, c.p, c.d, true};
        }
    }
    return best;
}

/**
 * Exact CVRP optimum for small n: Held-Karp TSP over every capacity-feasible
 * customer subset, then a set-partition DP over subsets.
 */
inline double cvrp_optimum(const Instance& inst) {
    const int n = inst.num_customers();
    const int full = (1 << n) - 1;
    const double inf = std::numeric_limits<double>::infinity();
    // path[mask][j]: shortest depot -> ... -> customer j visiting exactly mask.
    std::vector<std::vector<double>> path(static_cast<std::size_t>(full + 1), std::vector<double>(static_cast<std::size_t>(n), inf));
    for (int j = 0; j < n; ++j) {
        path[static_cast<std::size_t>(1 << j)][static_cast<std::size_t>(j)] = euclid(inst, 0, j + 1);
    }
    for (int mask = 1; mask <= full; ++mask) {
        for (int j = 0; j < n; ++j) {
            double cur = path[static_cast<std::size_t>(mask)][static_cast<std::size_t>(j)];
            if (!(mask & (1 << j)) || cur == inf) {
                continue;
            }
            for (int k = 0; k < n; ++k) {
                if (mask & (1 << k)) {
                    continue;
                }
                int next = mask | (1 << k);
                double cand = cur + euclid(inst, j + 1, k + 1);
                auto& slot = path[static_cast<std::size_t>(next)][static_cast<std::size_t>(k)];
                slot = std::min(slot, cand);
            }
        }
    }
    std::vector<double> route(static_cast<std::size_t>(full + 1), inf);
    for (int mask = 1; mask <= full; ++mask) {
        long demand = 0;
        for (int j = 0; j < n; ++j) {
            if (mask & (1 << j)) {
                demand += inst.node(j + 1).demand;
            }
        }
        if (demand > inst.capacity()) {
            continue;
        }
        for (int j = 0; j < n; ++j) {
            if (mask & (1 << j)) {
                route[static_cast<std::size_t>(mask)] =
                    std::min(route[static_cast<std::size_t>(mask)],
                             path[static_cast<std::size_t>(mask)][static_cast<std::size_t>(j)] + euclid(inst, j + 1, 0));
            }
        }
    }
    std::vector<double> best(static_cast<std::size_t>(full + 1), inf);
    best[0] = 0.0;
    for (int mask = 1; mask <= full; ++mask) {
        int low = mask & -mask;
        int rest = mask ^ low;
        // Subsets of mask that contain its lowest customer.
        for (int sub = rest;; sub = (sub - 1) & rest) {
            int part = sub | low;
            double r = route[static_cast<std::size_t>(part)];
            if (r < inf) {
                best[static_cast<std::size_t>(mask)] =
                    std::min(best[static_cast<std::size_t>(mask)], r + best[static_cast<std::size_t>(mask ^ part)]);
            }
            if (sub == 0) {
                break;
            }
        }
    }
    return best[static_cast<std::size_t>(full)];
}

} // namespace oracle
