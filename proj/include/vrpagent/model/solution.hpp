#pragma once

#include "vrpagent/model/instance.hpp"

#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

namespace vrpagent {

inline constexpr int kUnassigned = -1;

/// Absolute tolerance for treating two objective values as tied.
inline constexpr double kTieEpsilon = 1e-9;

/// Raised when tours and the customer index disagree (duplicates, foreign ids).
class StructureError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

/// Raised for customer ids outside [1, num_customers].
class InputError : public std::out_of_range {
public:
    using std::out_of_range::out_of_range;
};

/**
 * One vehicle route. The depot is implicit at both ends.
 *
 * For VRPTW, earliest[k] is the earliest service start at position k given the
 * prefix, and latest[k] the latest service start at k that keeps the suffix
 * feasible. Both are empty for the other variants.
 */
struct Tour {
    std::vector<int> customers;
    int demand = 0;
    double cost = 0.0;
    std::vector<double> earliest;
    std::vector<double> latest;
};

struct Insertion {
    int tour = 0;      // == num_tours() means "open a new tour"
    int position = 0;
    double delta = 0.0;
};

/**
 * Mutable routing state with incrementally maintained caches.
 *
 * Every customer is either in exactly one tour or unassigned. Tours are never
 * empty; a tour that loses its last customer is removed by moving the last
 * tour into its slot.
 */
class Solution {
public:
    /// Empty solution: every customer unassigned.
    explicit Solution(const Instance& instance);

    /// Builds a solution from explicit customer lists. Throws StructureError on
    /// duplicate or out-of-range ids and on empty tours.
    static Solution from_tours(const Instance& instance, const std::vector<std::vector<int>>& tours);

    const Instance& instance() const { return *instance_; }

    int num_tours() const { return static_cast<int>(tours_.size()); }
    const Tour& tour(int t) const { return tours_[static_cast<std::size_t>(t)]; }
    std::span<const Tour> tours() const { return tours_; }

    /// Tour index of `customer`, or kUnassigned.
    int tour_of(int customer) const { return tour_of_[static_cast<std::size_t>(customer)]; }
    std::span<const int> customer_to_tour() const { return tour_of_; }

    std::span<const int> unassigned() const { return unassigned_; }
    bool is_assigned(int customer) const { return tour_of(customer) != kUnassigned; }
    int num_assigned() const { return instance_->num_customers() - static_cast<int>(unassigned_.size()); }
    bool is_complete() const { return unassigned_.empty(); }

    /// Cached objective: travel cost, plus forfeited prizes for PCVRP.
    double objective() const { return objective_; }

    /// Detaches the given customers. Duplicates and already-unassigned ids are
    /// ignored; ids outside [1, n] throw InputError before anything changes.
    void remove_customers(std::span<const int> ids);

    /**
     * Objective change of inserting an unassigned `customer` into `tour` at
     * `position` (0 = right after the depot). `tour == num_tours()` with
     * position 0 evaluates opening a new tour. Returns nullopt when capacity or
     * a time window would be violated. For PCVRP the prize is subtracted.
     */
    std::optional<double> insertion_delta(int customer, int tour, int position) const;

    /// Minimum-delta feasible insertion over all tours, positions and the
    /// new-tour option; ties go to the lower (tour, position).
    std::optional<Insertion> best_insertion(int customer) const;

    /// Commits an insertion. The caller is responsible for feasibility.
    void insert(int customer, int tour, int position);

    std::vector<std::vector<int>> tour_lists() const;

private:
    void refresh(Tour& tour) const;
    double insertion_cost(const Tour& tour, int customer, int position) const;
    bool time_feasible(const Tour& tour, int customer, int position) const;
    void drop_tour(int t);
    void mark_unassigned(int customer);
    void mark_assigned(int customer, int t);

    const Instance* instance_;
    std::vector<Tour> tours_;
    std::vector<int> tour_of_;
    std::vector<int> unassigned_;
    std::vector<int> unassigned_pos_;
    double objective_ = 0.0;
};

} // namespace vrpagent
