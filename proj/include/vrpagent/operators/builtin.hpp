#pragma once

#include "vrpagent/operators/operator_pair.hpp"

#include <string>
#include <string_view>
#include <vector>

namespace vrpagent {

/// Removes k ~ U{10..20} distinct assigned customers (k clamped to the number
/// assigned), chosen uniformly.
std::vector<int> seed_random_remove(const Instance& instance, const Solution& solution, Rng& rng);

/// Uniform random permutation of `ids`.
std::vector<int> seed_random_order(const Instance& instance, std::span<const int> ids, const Solution& partial, Rng& rng);

struct StringRemovalParams {
    int max_string_length = 10;   // L_max
    double avg_removed = 10.0;    // c-bar
    int max_strings = 4;
};

/**
 * SISRs-style spatially correlated removal. A random assigned seed customer is
 * picked; its neighbours are visited by increasing distance and, for every tour
 * not yet touched, a contiguous string containing the visited customer is
 * removed. At most `max_strings` tours are ruined.
 */
std::vector<int> string_remove(const Instance& instance, const Solution& solution, Rng& rng,
                               const StringRemovalParams& params = {});

enum class SortKey { demand_desc, depot_distance_desc, random };

/// Throws std::invalid_argument for unknown names.
SortKey parse_sort_key(std::string_view name);
std::string_view to_string(SortKey key);

/// Stable sort of `ids` by `key`; ties keep ascending id order. `random` shuffles.
std::vector<int> sort_by_key(const Instance& instance, std::span<const int> ids, Rng& rng, SortKey key);

/// Draws one of random / demand_desc / depot_distance_desc with weights 4:4:2.
std::vector<int> mixed_order(const Instance& instance, std::span<const int> ids, const Solution& partial, Rng& rng);

/**
 * Builds a pair from labels. Removal: "seed_random", "string". Order:
 * "random", "demand_desc", "depot_distance_desc", "sisr_mix". Throws
 * std::invalid_argument for unknown labels.
 */
OperatorPair make_builtin_pair(std::string_view remove_label, std::string_view order_label);

std::vector<std::string> builtin_remove_labels();
std::vector<std::string> builtin_order_labels();

} // namespace vrpagent
