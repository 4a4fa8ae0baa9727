#include "vrpagent/model/instance.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numeric>
#include <string>

namespace vrpagent {

std::string_view to_string(ProblemKind kind) {
    switch (kind) {
    case ProblemKind::CVRP:
        return "CVRP";
    case ProblemKind::VRPTW:
        return "VRPTW";
    case ProblemKind::PCVRP:
        return "PCVRP";
    }
    return "?";
}

ProblemKind parse_problem_kind(std::string_view text) {
    std::string lower(text);
    std::transform(lower.begin(), lower.end(), lower.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    if (lower == "cvrp") {
        return ProblemKind::CVRP;
    }
    if (lower == "vrptw") {
        return ProblemKind::VRPTW;
    }
    if (lower == "pcvrp") {
        return ProblemKind::PCVRP;
    }
    throw std::invalid_argument("unknown problem kind '" + std::string(text) + "'");
}

Instance::Instance(ProblemKind kind, int capacity, std::vector<NodeData> nodes, std::string name)
    : kind_(kind), capacity_(capacity), num_nodes_(static_cast<int>(nodes.size())), name_(std::move(name)),
      nodes_(std::move(nodes)) {
    if (nodes_.empty()) {
        throw InstanceError("instance needs at least a depot node");
    }
    if (capacity_ <= 0) {
        throw InstanceError("vehicle capacity must be positive");
    }
    if (nodes_[0].demand != 0) {
        throw InstanceError("depot demand must be 0");
    }
    for (int i = 0; i < num_nodes_; ++i) {
        const NodeData& n = nodes_[static_cast<std::size_t>(i)];
        if (!std::isfinite(n.x) || !std::isfinite(n.y)) {
            throw InstanceError("node " + std::to_string(i) + " has non-finite coordinates");
        }
        if (n.demand < 0 || n.demand > capacity_) {
            throw InstanceError("node " + std::to_string(i) + " demand outside [0, capacity]");
        }
        if (n.tw_start > n.tw_end) {
            throw InstanceError("node " + std::to_string(i) + " has tw_start > tw_end");
        }
        if (n.service_time < 0.0 || n.prize < 0.0) {
            throw InstanceError("node " + std::to_string(i) + " has negative service time or prize");
        }
    }

    auto n = static_cast<std::size_t>(num_nodes_);
    dist_.assign(n * n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            double dx = nodes_[i].x - nodes_[j].x;
            double dy = nodes_[i].y - nodes_[j].y;
            double d = std::sqrt(dx * dx + dy * dy);
            dist_[i * n + j] = d;
            dist_[j * n + i] = d;
        }
    }

    adjacency_.reserve(n * (n - 1));
    std::vector<int> order;
    order.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        order.clear();
        for (std::size_t j = 0; j < n; ++j) {
            if (j != i) {
                order.push_back(static_cast<int>(j));
            }
        }
        const double* row = dist_.data() + i * n;
        std::stable_sort(order.begin(), order.end(), [row](int a, int b) { return row[a] < row[b]; });
        adjacency_.insert(adjacency_.end(), order.begin(), order.end());
    }
}

} // namespace vrpagent
