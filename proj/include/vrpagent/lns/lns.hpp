#pragma once

#include "vrpagent/model/solution.hpp"
#include "vrpagent/operators/operator_pair.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace vrpagent {

#ifdef NDEBUG
inline constexpr std::int64_t kDefaultValidateEvery = 1024;
#else
inline constexpr std::int64_t kDefaultValidateEvery = 1;
#endif

struct LnsConfig {
    double time_limit = 10.0;                  // seconds
    std::optional<std::int64_t> max_iterations;  // iteration budget; makes the run deterministic
    std::uint64_t seed = 0;
    std::optional<double> sa_initial_temp;     // default: 0.05 * initial objective
    std::optional<double> sa_final_temp;       // default: 1e-4 * initial objective
    bool record_trace = true;
    std::int64_t validate_every = kDefaultValidateEvery;  // 0 disables

    /// Throws std::invalid_argument.
    void check() const;
};

struct TracePoint {
    double elapsed = 0.0;
    double objective = 0.0;
    std::int64_t iteration = 0;
};

struct RunStats {
    std::int64_t iterations = 0;
    double initial_objective = 0.0;
    double best_objective = 0.0;
    std::vector<TracePoint> best_objective_trace;
    std::int64_t accepted_count = 0;
    std::int64_t improved_count = 0;
    std::int64_t validations = 0;
    std::int64_t validation_failures = 0;
    double elapsed = 0.0;

    double iterations_per_second() const { return elapsed > 0.0 ? static_cast<double>(iterations) / elapsed : 0.0; }
};

enum class RunStatus { ok, operator_failure };

struct LnsResult {
    Solution best;
    RunStats stats;
    RunStatus status = RunStatus::ok;
    std::string failure;
};

/// One singleton tour per customer, in id order. Throws InstanceError for a
/// VRPTW customer that a direct drive cannot reach before its window closes.
Solution initial_solution(const Instance& instance);

/**
 * Cleans a removal list: drops ids outside [1, n], keeps the first occurrence
 * of each id, truncates to `cap`. Already-unassigned ids are kept only when
 * the instance collects prizes (they become reinsertion candidates); otherwise
 * they are dropped.
 */
std::vector<int> sanitize_removal(std::span<const int> raw, const Solution& solution, std::size_t cap);

/// Turns `raw` into a permutation of `removed`: first occurrences of members
/// are kept in order, everything else dropped, missing members appended in
/// ascending id order.
std::vector<int> sanitize_order(std::span<const int> raw, std::span<const int> removed);

/**
 * Inserts each customer of `order` at its cheapest feasible position (new tour
 * included). For PCVRP a customer is only inserted when that lowers the
 * objective. Every id in `order` must be unassigned.
 */
void greedy_reinsert(Solution& partial, std::span<const int> order);

/// Geometric cooling from t0 to tf over the budget fraction in [0, 1].
class Annealing {
public:
    Annealing(double initial_temp, double final_temp);

    double temperature(double fraction) const;

    /// True for candidate <= current; else true with probability exp(-delta / T).
    bool accept(double current, double candidate, double fraction, Rng& rng) const;

    static bool accept_worse(double delta, double temperature, Rng& rng);

private:
    double initial_;
    double final_;
};

/// Destroy / order / repair / accept loop until the budget runs out.
LnsResult run_lns(const Instance& instance, const OperatorPair& ops, const LnsConfig& config);

/// Writes "elapsed_s,best_objective,iteration" rows with a header line.
void write_trace(std::ostream& out, const RunStats& stats);

} // namespace vrpagent
