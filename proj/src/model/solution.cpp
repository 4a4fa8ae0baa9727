#include "vrpagent/model/solution.hpp"

#include <algorithm>
#include <limits>
#include <string>

namespace vrpagent {

Solution::Solution(const Instance& instance)
    : instance_(&instance),
      tour_of_(static_cast<std::size_t>(instance.num_nodes()), kUnassigned),
      unassigned_pos_(static_cast<std::size_t>(instance.num_nodes()), -1) {
    unassigned_.reserve(static_cast<std::size_t>(instance.num_customers()));
    for (int c = 1; c < instance.num_nodes(); ++c) {
        unassigned_pos_[static_cast<std::size_t>(c)] = static_cast<int>(unassigned_.size());
        unassigned_.push_back(c);
        if (instance.collects_prizes()) {
            objective_ += instance.prize(c);
        }
    }
}

Solution Solution::from_tours(const Instance& instance, const std::vector<std::vector<int>>& tours) {
    Solution s(instance);
    std::vector<char> seen(static_cast<std::size_t>(instance.num_nodes()), 0);
    for (const auto& list : tours) {
        if (list.empty()) {
            throw StructureError("empty tour");
        }
        for (int c : list) {
            if (!instance.is_customer(c)) {
                throw StructureError("customer id " + std::to_string(c) + " out of range");
            }
            if (seen[static_cast<std::size_t>(c)]) {
                throw StructureError("customer " + std::to_string(c) + " appears twice");
            }
            seen[static_cast<std::size_t>(c)] = 1;
        }
    }
    for (const auto& list : tours) {
        int t = s.num_tours();
        Tour tour;
        tour.customers = list;
        s.refresh(tour);
        for (int c : list) {
            s.mark_assigned(c, t);
            if (instance.collects_prizes()) {
                s.objective_ -= instance.prize(c);
            }
        }
        s.objective_ += tour.cost;
        s.tours_.push_back(std::move(tour));
    }
    return s;
}

void Solution::mark_unassigned(int customer) {
    auto c = static_cast<std::size_t>(customer);
    tour_of_[c] = kUnassigned;
    unassigned_pos_[c] = static_cast<int>(unassigned_.size());
    unassigned_.push_back(customer);
}

void Solution::mark_assigned(int customer, int t) {
    auto c = static_cast<std::size_t>(customer);
    tour_of_[c] = t;
    int pos = unassigned_pos_[c];
    if (pos >= 0) {
        int last = unassigned_.back();
        unassigned_[static_cast<std::size_t>(pos)] = last;
        unassigned_pos_[static_cast<std::size_t>(last)] = pos;
        unassigned_.pop_back();
        unassigned_pos_[c] = -1;
    }
}

void Solution::refresh(Tour& tour) const {
    const Instance& inst = *instance_;
    const auto& cs = tour.customers;
    int demand = 0;
    double cost = 0.0;
    int prev = 0;
    for (int c : cs) {
        demand += inst.demand(c);
        cost += inst.dist(prev, c);
        prev = c;
    }
    cost += inst.dist(prev, 0);
    tour.demand = demand;
    tour.cost = cost;

    if (!inst.has_time_windows()) {
        return;
    }
    std::size_t m = cs.size();
    tour.earliest.resize(m);
    tour.latest.resize(m);
    double depart = 0.0;
    prev = 0;
    for (std::size_t k = 0; k < m; ++k) {
        int c = cs[k];
        double start = std::max(depart + inst.dist(prev, c), inst.tw_start(c));
        tour.earliest[k] = start;
        depart = start + inst.service_time(c);
        prev = c;
    }
    for (std::size_t k = m; k-- > 0;) {
        int c = cs[k];
        double latest = inst.tw_end(c);
        if (k + 1 < m) {
            int next = cs[k + 1];
            latest = std::min(latest, tour.latest[k + 1] - inst.service_time(c) - inst.dist(c, next));
        }
        tour.latest[k] = latest;
    }
}

double Solution::insertion_cost(const Tour& tour, int customer, int position) const {
    const Instance& inst = *instance_;
    const auto& cs = tour.customers;
    int prev = position == 0 ? 0 : cs[static_cast<std::size_t>(position - 1)];
    int next = position == static_cast<int>(cs.size()) ? 0 : cs[static_cast<std::size_t>(position)];
    return inst.dist(prev, customer) + inst.dist(customer, next) - inst.dist(prev, next);
}

bool Solution::time_feasible(const Tour& tour, int customer, int position) const {
    const Instance& inst = *instance_;
    const auto& cs = tour.customers;
    int prev = 0;
    double depart = 0.0;
    if (position > 0) {
        auto p = static_cast<std::size_t>(position - 1);
        prev = cs[p];
        depart = tour.earliest[p] + inst.service_time(prev);
    }
    double start = std::max(depart + inst.dist(prev, customer), inst.tw_start(customer));
    if (start > inst.tw_end(customer)) {
        return false;
    }
    if (position < static_cast<int>(cs.size())) {
        auto q = static_cast<std::size_t>(position);
        double arrive_next = start + inst.service_time(customer) + inst.dist(customer, cs[q]);
        if (arrive_next > tour.latest[q]) {
            return false;
        }
    }
    return true;
}

std::optional<double> Solution::insertion_delta(int customer, int tour, int position) const {
    const Instance& inst = *instance_;
    double prize = inst.collects_prizes() ? inst.prize(customer) : 0.0;
    if (tour == num_tours()) {
        if (position != 0) {
            return std::nullopt;
        }
        Tour empty;
        if (inst.has_time_windows() && !time_feasible(empty, customer, 0)) {
            return std::nullopt;
        }
        return 2.0 * inst.dist(0, customer) - prize;
    }
    const Tour& t = tours_[static_cast<std::size_t>(tour)];
    if (position < 0 || position > static_cast<int>(t.customers.size())) {
        return std::nullopt;
    }
    if (t.demand + inst.demand(customer) > inst.capacity()) {
        return std::nullopt;
    }
    if (inst.has_time_windows() && !time_feasible(t, customer, position)) {
        return std::nullopt;
    }
    return insertion_cost(t, customer, position) - prize;
}

std::optional<Insertion> Solution::best_insertion(int customer) const {
    const Instance& inst = *instance_;
    const int demand = inst.demand(customer);
    const int capacity = inst.capacity();
    const bool timed = inst.has_time_windows();
    const double prize = inst.collects_prizes() ? inst.prize(customer) : 0.0;

    Insertion best{-1, 0, std::numeric_limits<double>::infinity()};
    for (int t = 0; t < num_tours(); ++t) {
        const Tour& tour = tours_[static_cast<std::size_t>(t)];
        if (tour.demand + demand > capacity) {
            continue;
        }
        const auto& cs = tour.customers;
        const int m = static_cast<int>(cs.size());
        int prev = 0;
        for (int p = 0; p <= m; ++p) {
            int next = p == m ? 0 : cs[static_cast<std::size_t>(p)];
            double delta = inst.dist(prev, customer) + inst.dist(customer, next) - inst.dist(prev, next);
            if (delta < best.delta - kTieEpsilon && (!timed || time_feasible(tour, customer, p))) {
                best = {t, p, delta};
            }
            prev = next;
        }
    }
    if (!timed || time_feasible(Tour{}, customer, 0)) {
        double delta = 2.0 * inst.dist(0, customer);
        if (delta < best.delta - kTieEpsilon) {
            best = {num_tours(), 0, delta};
        }
    }
    if (best.tour < 0) {
        return std::nullopt;
    }
    best.delta -= prize;
    return best;
}

void Solution::insert(int customer, int tour, int position) {
    const Instance& inst = *instance_;
    if (!inst.is_customer(customer)) {
        throw InputError("customer id " + std::to_string(customer) + " out of range");
    }
    if (is_assigned(customer)) {
        throw StructureError("customer " + std::to_string(customer) + " is already assigned");
    }
    if (tour == num_tours()) {
        tours_.emplace_back();
    }
    Tour& t = tours_.at(static_cast<std::size_t>(tour));
    double old_cost = t.cost;
    auto pos = std::clamp<std::ptrdiff_t>(position, 0, static_cast<std::ptrdiff_t>(t.customers.size()));
    t.customers.insert(t.customers.begin() + pos, customer);
    refresh(t);
    objective_ += t.cost - old_cost;
    if (inst.collects_prizes()) {
        objective_ -= inst.prize(customer);
    }
    mark_assigned(customer, tour);
}

void Solution::remove_customers(std::span<const int> ids) {
    const Instance& inst = *instance_;
    for (int id : ids) {
        if (!inst.is_customer(id)) {
            throw InputError("customer id " + std::to_string(id) + " out of range");
        }
    }
    std::vector<int> affected;
    for (int id : ids) {
        int t = tour_of(id);
        if (t == kUnassigned) {
            continue;
        }
        mark_unassigned(id);
        if (inst.collects_prizes()) {
            objective_ += inst.prize(id);
        }
        if (std::find(affected.begin(), affected.end(), t) == affected.end()) {
            affected.push_back(t);
        }
    }
    for (int t : affected) {
        Tour& tour = tours_[static_cast<std::size_t>(t)];
        double old_cost = tour.cost;
        std::erase_if(tour.customers, [this](int c) { return tour_of(c) == kUnassigned; });
        if (tour.customers.empty()) {
            tour.cost = 0.0;
            tour.demand = 0;
        } else {
            refresh(tour);
        }
        objective_ += tour.cost - old_cost;
    }
    std::sort(affected.begin(), affected.end(), std::greater<>());
    for (int t : affected) {
        if (tours_[static_cast<std::size_t>(t)].customers.empty()) {
            drop_tour(t);
        }
    }
}

void Solution::drop_tour(int t) {
    auto last = static_cast<int>(tours_.size()) - 1;
    if (t != last) {
        tours_[static_cast<std::size_t>(t)] = std::move(tours_.back());
        for (int c : tours_[static_cast<std::size_t>(t)].customers) {
            tour_of_[static_cast<std::size_t>(c)] = t;
        }
    }
    tours_.pop_back();
}

std::vector<std::vector<int>> Solution::tour_lists() const {
    std::vector<std::vector<int>> out;
    out.reserve(tours_.size());
    for (const Tour& t : tours_) {
        out.push_back(t.customers);
    }
    return out;
}

} // namespace vrpagent
