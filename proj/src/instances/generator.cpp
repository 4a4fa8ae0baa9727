#include "vrpagent/instances/generator.hpp"

#include "vrpagent/util/rng.hpp"

#include <cmath>
#include <string>
#include <vector>

namespace vrpagent {

void GenParams::check() const {
    if (n < 0) {
        throw std::invalid_argument("customer count must be nonnegative");
    }
    if (capacity <= 0) {
        throw std::invalid_argument("capacity must be positive");
    }
    if (demand_lo < 1 || demand_hi < demand_lo || demand_hi > capacity) {
        throw std::invalid_argument("demand range must satisfy 1 <= lo <= hi <= capacity");
    }
    if (kind == ProblemKind::VRPTW) {
        if (!(horizon > 0.0)) {
            throw std::invalid_argument("horizon must be positive");
        }
        if (tw_width_lo < 0.0 || tw_width_hi < tw_width_lo || service_time < 0.0) {
            throw std::invalid_argument("bad time window width range or service time");
        }
    }
    if (kind == ProblemKind::PCVRP && (prize_lo < 0.0 || prize_hi <= prize_lo)) {
        throw std::invalid_argument("prize range must satisfy 0 <= lo < hi");
    }
}

Instance generate(const GenParams& params) {
    params.check();
    Rng rng(params.seed);
    std::vector<NodeData> nodes(static_cast<std::size_t>(params.n) + 1);

    // Draw order is part of the format contract: coordinates, demands, windows, prizes.
    for (auto& node : nodes) {
        node.x = rng.uniform01();
        node.y = rng.uniform01();
    }
    for (std::size_t i = 1; i < nodes.size(); ++i) {
        nodes[i].demand = rng.uniform_int(params.demand_lo, params.demand_hi);
    }
    if (params.kind == ProblemKind::VRPTW) {
        nodes[0].tw_start = 0.0;
        nodes[0].tw_end = params.horizon;
        for (std::size_t i = 1; i < nodes.size(); ++i) {
            NodeData& node = nodes[i];
            double dx = node.x - nodes[0].x;
            double dy = node.y - nodes[0].y;
            double d = std::sqrt(dx * dx + dy * dy);
            double width = rng.uniform(params.tw_width_lo, params.tw_width_hi);
            double lo = std::max(0.0, d - width);
            double hi = params.horizon - params.service_time - d - width;
            if (hi < lo) {
                throw GenerationError("horizon " + std::to_string(params.horizon) +
                                      " too short for customer " + std::to_string(i));
            }
            node.tw_start = rng.uniform(lo, hi);
            node.tw_end = node.tw_start + width;
            node.service_time = params.service_time;
        }
    }
    if (params.kind == ProblemKind::PCVRP) {
        for (std::size_t i = 1; i < nodes.size(); ++i) {
            nodes[i].prize = params.prize_hi - (params.prize_hi - params.prize_lo) * rng.uniform01();
        }
    }
    std::string name = std::string(to_string(params.kind)) + "-n" + std::to_string(params.n) + "-s" +
                       std::to_string(params.seed);
    return Instance(params.kind, params.capacity, std::move(nodes), std::move(name));
}

} // namespace vrpagent
