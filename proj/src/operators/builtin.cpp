#include "vrpagent/operators/builtin.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace vrpagent {

namespace {

std::vector<int> assigned_customers(const Solution& solution) {
    std::vector<int> out;
    out.reserve(static_cast<std::size_t>(solution.num_assigned()));
    for (const Tour& t : solution.tours()) {
        out.insert(out.end(), t.customers.begin(), t.customers.end());
    }
    return out;
}

} // namespace

std::vector<int> seed_random_remove(const Instance&, const Solution& solution, Rng& rng) {
    std::vector<int> pool = assigned_customers(solution);
    int k = std::min(rng.uniform_int(10, 20), static_cast<int>(pool.size()));
    // Partial Fisher-Yates: the first k slots end up a uniform k-subset.
    for (int i = 0; i < k; ++i) {
        std::size_t j = static_cast<std::size_t>(i) + rng.index(pool.size() - static_cast<std::size_t>(i));
        std::swap(pool[static_cast<std::size_t>(i)], pool[j]);
    }
    pool.resize(static_cast<std::size_t>(k));
    return pool;
}

std::vector<int> seed_random_order(const Instance&, std::span<const int> ids, const Solution&, Rng& rng) {
    std::vector<int> out(ids.begin(), ids.end());
    rng.shuffle(out);
    return out;
}

std::vector<int> string_remove(const Instance& instance, const Solution& solution, Rng& rng,
                               const StringRemovalParams& params) {
    std::vector<int> removed;
    if (solution.num_tours() == 0) {
        return removed;
    }
    double avg_tour_size = static_cast<double>(solution.num_assigned()) / solution.num_tours();
    double ls_max = std::min(static_cast<double>(params.max_string_length), avg_tour_size);
    double ks_max = 4.0 * params.avg_removed / (1.0 + ls_max) - 1.0;
    int strings = static_cast<int>(std::floor(rng.uniform(1.0, ks_max + 1.0)));
    strings = std::clamp(strings, 1, std::max(1, params.max_strings));

    std::vector<int> pool = assigned_customers(solution);
    int seed = pool[rng.index(pool.size())];

    std::vector<char> ruined(static_cast<std::size_t>(solution.num_tours()), 0);
    int ruined_count = 0;
    auto visit = [&](int c) {
        int t = solution.tour_of(c);
        if (t == kUnassigned || ruined[static_cast<std::size_t>(t)]) {
            return;
        }
        const auto& cs = solution.tour(t).customers;
        int size = static_cast<int>(cs.size());
        int max_len = std::max(1, std::min(size, static_cast<int>(std::floor(ls_max))));
        int len = rng.uniform_int(1, max_len);
        int pos = static_cast<int>(std::find(cs.begin(), cs.end(), c) - cs.begin());
        int first = rng.uniform_int(std::max(0, pos - len + 1), std::min(pos, size - len));
        for (int k = first; k < first + len; ++k) {
            removed.push_back(cs[static_cast<std::size_t>(k)]);
        }
        ruined[static_cast<std::size_t>(t)] = 1;
        ++ruined_count;
    };

    visit(seed);
    for (int c : instance.neighbors(seed)) {
        if (ruined_count >= strings) {
            break;
        }
        if (c != 0) {
            visit(c);
        }
    }
    return removed;
}

SortKey parse_sort_key(std::string_view name) {
    if (name == "demand_desc") {
        return SortKey::demand_desc;
    }
    if (name == "depot_distance_desc") {
        return SortKey::depot_distance_desc;
    }
    if (name == "random") {
        return SortKey::random;
    }
    throw std::invalid_argument("unknown sort key '" + std::string(name) + "'");
}

std::string_view to_string(SortKey key) {
    switch (key) {
    case SortKey::demand_desc:
        return "demand_desc";
    case SortKey::depot_distance_desc:
        return "depot_distance_desc";
    case SortKey::random:
        return "random";
    }
    return "?";
}

std::vector<int> sort_by_key(const Instance& instance, std::span<const int> ids, Rng& rng, SortKey key) {
    std::vector<int> out(ids.begin(), ids.end());
    switch (key) {
    case SortKey::random:
        rng.shuffle(out);
        break;
    case SortKey::demand_desc:
        std::sort(out.begin(), out.end());
        std::stable_sort(out.begin(), out.end(),
                         [&](int a, int b) { return instance.demand(a) > instance.demand(b); });
        break;
    case SortKey::depot_distance_desc:
        std::sort(out.begin(), out.end());
        std::stable_sort(out.begin(), out.end(),
                         [&](int a, int b) { return instance.dist(0, a) > instance.dist(0, b); });
        break;
    }
    return out;
}

std::vector<int> mixed_order(const Instance& instance, std::span<const int> ids, const Solution&, Rng& rng) {
    int draw = rng.uniform_int(0, 9);
    SortKey key = draw < 4 ? SortKey::random : draw < 8 ? SortKey::demand_desc : SortKey::depot_distance_desc;
    return sort_by_key(instance, ids, rng, key);
}

OperatorPair make_builtin_pair(std::string_view remove_label, std::string_view order_label) {
    OperatorPair pair;
    pair.origin = OperatorOrigin::builtin;
    pair.label = std::string(remove_label) + ":" + std::string(order_label);
    if (remove_label == "seed_random") {
        pair.remove = seed_random_remove;
    } else if (remove_label == "string") {
        pair.remove = [](const Instance& inst, const Solution& s, Rng& rng) { return string_remove(inst, s, rng); };
    } else {
        throw std::invalid_argument("unknown removal operator '" + std::string(remove_label) + "'");
    }
    if (order_label == "random") {
        pair.order = seed_random_order;
    } else if (order_label == "sisr_mix") {
        pair.order = mixed_order;
    } else {
        SortKey key = parse_sort_key(order_label);
        pair.order = [key](const Instance& inst, std::span<const int> ids, const Solution&, Rng& rng) {
            return sort_by_key(inst, ids, rng, key);
        };
    }
    return pair;
}

std::vector<std::string> builtin_remove_labels() { return {"seed_random", "string"}; }

std::vector<std::string> builtin_order_labels() {
    return {"random", "demand_desc", "depot_distance_desc", "sisr_mix"};
}

} // namespace vrpagent
