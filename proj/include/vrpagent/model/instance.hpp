#pragma once

#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace vrpagent {

enum class ProblemKind { CVRP, VRPTW, PCVRP };

std::string_view to_string(ProblemKind kind);

/// Accepts "cvrp", "vrptw", "pcvrp" in any case. Throws std::invalid_argument.
ProblemKind parse_problem_kind(std::string_view text);

/// Raised for instance data that violates the model (bad demand, inverted
/// windows, customers that cannot be reached in time, ...).
class InstanceError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Raw per-node attributes. Index 0 is the depot.
struct NodeData {
    double x = 0.0;
    double y = 0.0;
    int demand = 0;
    double tw_start = 0.0;
    double tw_end = 0.0;
    double service_time = 0.0;
    double prize = 0.0;

    bool operator==(const NodeData&) const = default;
};

/**
 * Immutable routing instance.
 *
 * Distances are Euclidean, computed once as sqrt(dx*dx + dy*dy) in double
 * precision. neighbors(i) lists every other node sorted by distance from i
 * (ties by node id).
 */
class Instance {
public:
    Instance(ProblemKind kind, int capacity, std::vector<NodeData> nodes, std::string name = {});

    ProblemKind kind() const { return kind_; }
    const std::string& name() const { return name_; }

    int num_nodes() const { return num_nodes_; }
    int num_customers() const { return num_nodes_ - 1; }
    int capacity() const { return capacity_; }

    const NodeData& node(int i) const { return nodes_[static_cast<std::size_t>(i)]; }
    std::span<const NodeData> nodes() const { return nodes_; }

    double dist(int i, int j) const {
        return dist_[static_cast<std::size_t>(i) * static_cast<std::size_t>(num_nodes_) + static_cast<std::size_t>(j)];
    }
    int demand(int i) const { return node(i).demand; }
    double tw_start(int i) const { return node(i).tw_start; }
    double tw_end(int i) const { return node(i).tw_end; }
    double service_time(int i) const { return node(i).service_time; }
    double prize(int i) const { return node(i).prize; }

    std::span<const int> neighbors(int i) const {
        auto width = static_cast<std::size_t>(num_nodes_ - 1);
        return {adjacency_.data() + static_cast<std::size_t>(i) * width, width};
    }

    bool has_time_windows() const { return kind_ == ProblemKind::VRPTW; }
    bool collects_prizes() const { return kind_ == ProblemKind::PCVRP; }

    bool is_customer(int id) const { return id >= 1 && id < num_nodes_; }

private:
    ProblemKind kind_;
    int capacity_;
    int num_nodes_;
    std::string name_;
    std::vector<NodeData> nodes_;
    std::vector<double> dist_;
    std::vector<int> adjacency_;
};

} // namespace vrpagent
