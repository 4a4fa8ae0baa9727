#include "vrpagent/model/feasibility.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace vrpagent {

std::string_view to_string(ViolationKind kind) {
    switch (kind) {
    case ViolationKind::capacity:
        return "capacity";
    case ViolationKind::time_window:
        return "time_window";
    case ViolationKind::duplicate:
        return "duplicate";
    case ViolationKind::missing:
        return "missing";
    case ViolationKind::invalid_id:
        return "invalid_id";
    case ViolationKind::empty_tour:
        return "empty_tour";
    case ViolationKind::cache_drift:
        return "cache_drift";
    case ViolationKind::mapping:
        return "mapping";
    }
    return "?";
}

bool FeasibilityReport::has(ViolationKind kind) const {
    return std::any_of(violations.begin(), violations.end(), [kind](const Violation& v) { return v.kind == kind; });
}

double route_cost(const Instance& instance, std::span<const int> customers) {
    double cost = 0.0;
    int prev = 0;
    for (int c : customers) {
        cost += instance.dist(prev, c);
        prev = c;
    }
    return cost + instance.dist(prev, 0);
}

FeasibilityReport validate_routes(const Instance& instance, const std::vector<std::vector<int>>& tours) {
    FeasibilityReport report;
    std::vector<int> seen_in(static_cast<std::size_t>(instance.num_nodes()), -1);

    for (std::size_t t = 0; t < tours.size(); ++t) {
        const auto& cs = tours[t];
        int ti = static_cast<int>(t);
        if (cs.empty()) {
            report.add(ViolationKind::empty_tour, ti, "tour has no customers");
            continue;
        }
        long demand = 0;
        double depart = 0.0;
        int prev = 0;
        for (int c : cs) {
            if (!instance.is_customer(c)) {
                report.add(ViolationKind::invalid_id, ti, "id " + std::to_string(c) + " is not a customer");
                continue;
            }
            auto idx = static_cast<std::size_t>(c);
            if (seen_in[idx] >= 0) {
                report.add(ViolationKind::duplicate, ti,
                           "customer " + std::to_string(c) + " also in tour " + std::to_string(seen_in[idx]));
            } else {
                seen_in[idx] = ti;
            }
            demand += instance.demand(c);
            if (instance.has_time_windows()) {
                double start = std::max(depart + instance.dist(prev, c), instance.tw_start(c));
                if (start > instance.tw_end(c) + kTimeTolerance) {
                    std::ostringstream msg;
                    msg.precision(17);
                    msg << "customer " << c << " served at " << start << " after window end " << instance.tw_end(c);
                    report.add(ViolationKind::time_window, ti, msg.str());
                }
                depart = start + instance.service_time(c);
            }
            prev = c;
        }
        if (demand > instance.capacity()) {
            report.add(ViolationKind::capacity, ti,
                       "demand " + std::to_string(demand) + " exceeds capacity " + std::to_string(instance.capacity()));
        }
    }
    if (!instance.collects_prizes()) {
        for (int c = 1; c < instance.num_nodes(); ++c) {
            if (seen_in[static_cast<std::size_t>(c)] < 0) {
                report.add(ViolationKind::missing, -1, "customer " + std::to_string(c) + " is not served");
            }
        }
    }
    return report;
}

FeasibilityReport validate(const Solution& solution, const Instance& instance) {
    auto lists = solution.tour_lists();
    FeasibilityReport report = validate_routes(instance, lists);

    std::vector<int> expected(static_cast<std::size_t>(instance.num_nodes()), kUnassigned);
    for (std::size_t t = 0; t < lists.size(); ++t) {
        const Tour& tour = solution.tour(static_cast<int>(t));
        int ti = static_cast<int>(t);
        long demand = 0;
        for (int c : lists[t]) {
            if (instance.is_customer(c)) {
                expected[static_cast<std::size_t>(c)] = ti;
                demand += instance.demand(c);
            }
        }
        if (demand != tour.demand) {
            report.add(ViolationKind::cache_drift, ti, "cached demand " + std::to_string(tour.demand) +
                                                           " != " + std::to_string(demand));
        }
        double cost = route_cost(instance, lists[t]);
        if (std::abs(cost - tour.cost) > kCacheTolerance) {
            report.add(ViolationKind::cache_drift, ti, "cached tour cost drifted");
        }
    }
    auto mapping = solution.customer_to_tour();
    for (int c = 1; c < instance.num_nodes(); ++c) {
        if (static_cast<int>(mapping.size()) <= c || mapping[static_cast<std::size_t>(c)] != expected[static_cast<std::size_t>(c)]) {
            report.add(ViolationKind::mapping, -1, "customer_to_tour wrong for " + std::to_string(c));
        }
    }
    std::vector<int> listed(solution.unassigned().begin(), solution.unassigned().end());
    std::sort(listed.begin(), listed.end());
    std::vector<int> want;
    for (int c = 1; c < instance.num_nodes(); ++c) {
        if (expected[static_cast<std::size_t>(c)] == kUnassigned) {
            want.push_back(c);
        }
    }
    if (listed != want) {
        report.add(ViolationKind::mapping, -1, "unassigned set inconsistent with tours");
    }
    if (!report.has(ViolationKind::invalid_id) && !report.has(ViolationKind::duplicate)) {
        double recomputed = objective(instance, lists);
        if (std::abs(recomputed - solution.objective()) > kCacheTolerance) {
            report.add(ViolationKind::cache_drift, -1, "cached objective drifted");
        }
    }
    return report;
}

double objective(const Instance& instance, const std::vector<std::vector<int>>& tours) {
    std::vector<char> served(static_cast<std::size_t>(instance.num_nodes()), 0);
    double total = 0.0;
    for (const auto& cs : tours) {
        for (int c : cs) {
            if (!instance.is_customer(c)) {
                throw StructureError("customer id " + std::to_string(c) + " out of range");
            }
            if (served[static_cast<std::size_t>(c)]) {
                throw StructureError("customer " + std::to_string(c) + " appears twice");
            }
            served[static_cast<std::size_t>(c)] = 1;
        }
        if (!cs.empty()) {
            total += route_cost(instance, cs);
        }
    }
    if (instance.collects_prizes()) {
        for (int c = 1; c < instance.num_nodes(); ++c) {
            if (!served[static_cast<std::size_t>(c)]) {
                total += instance.prize(c);
            }
        }
    }
    return total;
}

double objective(const Solution& solution, const Instance& instance) {
    auto lists = solution.tour_lists();
    auto mapping = solution.customer_to_tour();
    if (static_cast<int>(mapping.size()) != instance.num_nodes()) {
        throw StructureError("solution belongs to a different instance");
    }
    for (std::size_t t = 0; t < lists.size(); ++t) {
        for (int c : lists[t]) {
            if (instance.is_customer(c) && mapping[static_cast<std::size_t>(c)] != static_cast<int>(t)) {
                throw StructureError("customer_to_tour disagrees with tours for customer " + std::to_string(c));
            }
        }
    }
    return objective(instance, lists);
}

} // namespace vrpagent
