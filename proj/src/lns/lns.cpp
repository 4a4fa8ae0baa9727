#include "vrpagent/lns/lns.hpp"

#include "vrpagent/model/feasibility.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ostream>
#include <stdexcept>

namespace vrpagent {

void LnsConfig::check() const {
    if (!(time_limit > 0.0)) {
        throw std::invalid_argument("time_limit must be positive");
    }
    if (max_iterations && *max_iterations < 0) {
        throw std::invalid_argument("max_iterations must be nonnegative");
    }
    if (sa_final_temp && !(*sa_final_temp > 0.0)) {
        throw std::invalid_argument("sa_final_temp must be positive");
    }
    if (sa_initial_temp && sa_final_temp && *sa_initial_temp < *sa_final_temp) {
        throw std::invalid_argument("sa_initial_temp must be >= sa_final_temp");
    }
    if (validate_every < 0) {
        throw std::invalid_argument("validate_every must be nonnegative");
    }
}

Solution initial_solution(const Instance& instance) {
    Solution s(instance);
    for (int c = 1; c < instance.num_nodes(); ++c) {
        if (instance.has_time_windows()) {
            double start = std::max(instance.dist(0, c), instance.tw_start(c));
            if (start > instance.tw_end(c)) {
                throw InstanceError("customer " + std::to_string(c) + " cannot be reached before its window closes");
            }
        }
        s.insert(c, s.num_tours(), 0);
    }
    return s;
}

std::vector<int> sanitize_removal(std::span<const int> raw, const Solution& solution, std::size_t cap) {
    const Instance& inst = solution.instance();
    std::vector<char> taken(static_cast<std::size_t>(inst.num_nodes()), 0);
    std::vector<int> out;
    for (int id : raw) {
        if (out.size() >= cap) {
            break;
        }
        if (!inst.is_customer(id) || taken[static_cast<std::size_t>(id)]) {
            continue;
        }
        if (!solution.is_assigned(id) && !inst.collects_prizes()) {
            continue;
        }
        taken[static_cast<std::size_t>(id)] = 1;
        out.push_back(id);
    }
    return out;
}

std::vector<int> sanitize_order(std::span<const int> raw, std::span<const int> removed) {
    std::vector<int> members(removed.begin(), removed.end());
    std::sort(members.begin(), members.end());
    std::vector<char> used(members.size(), 0);
    std::vector<int> out;
    out.reserve(members.size());
    for (int id : raw) {
        auto it = std::lower_bound(members.begin(), members.end(), id);
        if (it == members.end() || *it != id) {
            continue;
        }
        auto k = static_cast<std::size_t>(it - members.begin());
        if (!used[k]) {
            used[k] = 1;
            out.push_back(id);
        }
    }
    for (std::size_t k = 0; k < members.size(); ++k) {
        if (!used[k] && (k == 0 || members[k] != members[k - 1])) {
            out.push_back(members[k]);
        }
    }
    return out;
}

void greedy_reinsert(Solution& partial, std::span<const int> order) {
    const bool prize_collecting = partial.instance().collects_prizes();
    for (int c : order) {
        auto best = partial.best_insertion(c);
        if (!best) {
            continue;
        }
        if (prize_collecting && !(best->delta < 0.0)) {
            continue;
        }
        partial.insert(c, best->tour, best->position);
    }
}

Annealing::Annealing(double initial_temp, double final_temp) : initial_(initial_temp), final_(final_temp) {
    if (!(final_temp > 0.0) || initial_temp < final_temp) {
        throw std::invalid_argument("annealing needs initial >= final > 0");
    }
}

double Annealing::temperature(double fraction) const {
    fraction = std::clamp(fraction, 0.0, 1.0);
    return initial_ * std::pow(final_ / initial_, fraction);
}

bool Annealing::accept_worse(double delta, double temperature, Rng& rng) {
    return rng.uniform01() < std::exp(-delta / temperature);
}

bool Annealing::accept(double current, double candidate, double fraction, Rng& rng) const {
    double delta = candidate - current;
    if (delta <= 0.0) {
        return true;
    }
    return accept_worse(delta, temperature(fraction), rng);
}

LnsResult run_lns(const Instance& instance, const OperatorPair& ops, const LnsConfig& config) {
    config.check();
    using Clock = std::chrono::steady_clock;
    const auto started = Clock::now();
    auto elapsed = [&] { return std::chrono::duration<double>(Clock::now() - started).count(); };

    Solution current = initial_solution(instance);
    LnsResult result{current, {}, RunStatus::ok, {}};
    RunStats& stats = result.stats;
    stats.initial_objective = current.objective();
    stats.best_objective = current.objective();
    if (config.record_trace) {
        stats.best_objective_trace.push_back({elapsed(), stats.best_objective, 0});
    }
    if (instance.num_customers() == 0) {
        stats.elapsed = elapsed();
        return result;
    }

    double scale = std::max(stats.initial_objective, 1e-12);
    double t0 = config.sa_initial_temp.value_or(0.05 * scale);
    double tf = config.sa_final_temp.value_or(1e-4 * scale);
    Annealing annealing(std::max(t0, tf), tf);

    Rng rng(config.seed);
    const auto cap = static_cast<std::size_t>((instance.num_customers() + 1) / 2);

    while (true) {
        double now = elapsed();
        if (config.max_iterations ? stats.iterations >= *config.max_iterations : now >= config.time_limit) {
            break;
        }
        if (now >= config.time_limit) {
            break;
        }
        double fraction = config.max_iterations && *config.max_iterations > 0
                              ? static_cast<double>(stats.iterations) / static_cast<double>(*config.max_iterations)
                              : now / config.time_limit;

        Solution candidate = current;
        try {
            std::vector<int> raw = ops.remove(instance, candidate, rng);
            std::vector<int> removed = sanitize_removal(raw, candidate, cap);
            candidate.remove_customers(removed);
            std::vector<int> raw_order = ops.order(instance, removed, candidate, rng);
            std::vector<int> order = sanitize_order(raw_order, removed);
            greedy_reinsert(candidate, order);
        } catch (const std::exception& e) {
            result.status = RunStatus::operator_failure;
            result.failure = e.what();
            break;
        }
        ++stats.iterations;

        if (!annealing.accept(current.objective(), candidate.objective(), fraction, rng)) {
            continue;
        }
        if (config.validate_every > 0 && stats.iterations % config.validate_every == 0) {
            ++stats.validations;
            bool ok = validate(candidate, instance).feasible &&
                      (instance.collects_prizes() || candidate.is_complete());
            if (!ok) {
                ++stats.validation_failures;
                continue;
            }
        }
        ++stats.accepted_count;
        current = std::move(candidate);
        if (current.objective() < stats.best_objective - kTieEpsilon) {
            result.best = current;
            stats.best_objective = current.objective();
            ++stats.improved_count;
            if (config.record_trace) {
                stats.best_objective_trace.push_back({elapsed(), stats.best_objective, stats.iterations});
            }
        }
    }
    stats.elapsed = elapsed();
    return result;
}

void write_trace(std::ostream& out, const RunStats& stats) {
    out << "elapsed_s,best_objective,iteration\n";
    auto old = out.precision(17);
    for (const auto& p : stats.best_objective_trace) {
        out << p.elapsed << ',' << p.objective << ',' << p.iteration << '\n';
    }
    out.precision(old);
}

} // namespace vrpagent
