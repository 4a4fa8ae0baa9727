#pragma once

#include "vrpagent/model/instance.hpp"
#include "vrpagent/model/solution.hpp"
#include "vrpagent/util/rng.hpp"

#include <functional>
#include <span>
#include <string>
#include <vector>

namespace vrpagent {

/// Chooses customers to detach. Must not mutate the solution.
using RemoveFn = std::function<std::vector<int>(const Instance&, const Solution&, Rng&)>;

/// Sequences the removed customers for reinsertion. Receives the partial
/// solution after removal.
using OrderFn = std::function<std::vector<int>(const Instance&, std::span<const int> removed, const Solution& partial, Rng&)>;

enum class OperatorOrigin { builtin, external_candidate };

struct OperatorPair {
    RemoveFn remove;
    OrderFn order;
    std::string label;
    OperatorOrigin origin = OperatorOrigin::builtin;
};

} // namespace vrpagent
