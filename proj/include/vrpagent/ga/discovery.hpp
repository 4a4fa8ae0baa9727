#pragma once

#include "vrpagent/eval/evaluator.hpp"
#include "vrpagent/llm/gateway.hpp"

#include <json.hpp>

#include <array>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace vrpagent {

enum class CreationKind { init, crossover, mutation_ablation, mutation_extend, mutation_adjust, mutation_refactor };

std::string_view to_string(CreationKind k);
CreationKind parse_creation_kind(std::string_view s);

/// The four mutation kinds in template order.
const std::array<CreationKind, 4>& mutation_kinds();
TemplateId mutation_template(CreationKind k);

/// Non-empty lines after trimming trailing whitespace.
int count_lines(std::string_view source);

struct Individual {
    std::string id;
    std::string source;
    int line_count = 0;
    std::optional<double> fitness;  // empty = unevaluated, kDisqualified = disqualified
    std::vector<std::string> parents;
    CreationKind kind = CreationKind::init;
    int generation = 0;              // iteration that created it (0 = initial population)
    std::vector<double> eval_detail; // per-instance objectives
    std::string eval_status;
    std::string eval_message;

    bool evaluated() const { return fitness.has_value(); }
    bool disqualified() const { return fitness && *fitness == kDisqualified; }
};

Individual make_individual(std::string id, std::string source, CreationKind kind, std::vector<std::string> parents,
                           int generation);

nlohmann::json to_json(const Individual& ind);
Individual individual_from_json(const nlohmann::json& j);

/// Ranking order: finite fitness ascending, then fewer lines, then lower id.
/// Disqualified after every finite value, unevaluated last.
bool ranks_before(const Individual& a, const Individual& b);

class DiscoveryFailure : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Fitness of `ind` under `report`: mean objective + lambda * line_count, or
/// kDisqualified when any instance failed.
double fitness(const Individual& ind, const EvalReport& report, double lambda);

/// Stores fitness, per-instance objectives and status from `report`.
void apply_report(Individual& ind, const EvalReport& report, double lambda);

struct Partition {
    std::vector<Individual> elites;
    std::vector<Individual> non_elites;
};

/// The k best by ranks_before as elites, the rest as non-elites (in rank
/// order). Throws DiscoveryFailure when fewer than k have finite fitness.
Partition top_k_elite(std::vector<Individual> population, std::size_t k);

struct DiscoveryConfig {
    ProblemKind problem = ProblemKind::CVRP;
    int n_init = 100;
    int n_elite = 10;
    int n_offspring = 30;
    double crossover_bias = 0.8;
    bool standard_crossover = false;
    double lambda = 2e-4;
    int iterations = 40;
    bool mutation_enabled = true;
    std::vector<EvalInstance> train;
    std::vector<EvalInstance> validation;
    double per_instance_time = 20.0;
    std::optional<std::int64_t> max_iterations;
    /// Draw fresh training seeds every iteration and re-evaluate the whole
    /// population on them; off keeps the seeds fixed for the run.
    bool resample_train_seeds = false;
    int llm_retries = 2;
    int eval_workers = 1;
    int finalists_top = 10;
    std::uint64_t master_seed = 0;
    std::string provider = "mock";
    GatewaySettings llm;

    /// Throws std::invalid_argument.
    void check() const;
};

nlohmann::json to_json(const DiscoveryConfig& c);
/// Rejects unknown keys; absent keys keep their defaults.
DiscoveryConfig discovery_config_from_json(const nlohmann::json& j);

/// Training instances used in `iteration` (the configured ones unless seeds
/// are resampled).
std::vector<EvalInstance> training_set(const DiscoveryConfig& c, int iteration);

struct GenerationRecord {
    int iteration = 0;             // 1-based; iterations + 1 marks the final evaluation
    bool final = false;
    std::vector<Individual> population;
    std::vector<std::string> elites;
    double elite_min = kDisqualified;
    std::string best_id;
    double best_fitness = kDisqualified;
    nlohmann::json usage;
};

nlohmann::json to_json(const GenerationRecord& g);
GenerationRecord generation_from_json(const nlohmann::json& j);

struct GaResult {
    Individual best;                    // lowest training fitness ever seen
    std::vector<Individual> archive;    // every evaluated individual in commit order
    std::vector<GenerationRecord> generations;
    int resumed_after = 0;              // last iteration restored from a checkpoint
};

struct GaHooks {
    std::function<void(const GenerationRecord&)> on_generation;
};

/**
 * Runs the discovery GA and checkpoints into `run_dir`:
 *   config.json        resolved configuration
 *   individuals.jsonl  every evaluated individual, one JSON object per line
 *   generations.jsonl  population snapshot after each iteration
 * With `resume`, completed iterations are restored from `run_dir` and the run
 * continues; records of an interrupted iteration are discarded and redone.
 */
GaResult ga_run(const DiscoveryConfig& config, Gateway& gateway, Evaluator& evaluator,
                const std::filesystem::path& run_dir, bool resume = false, const GaHooks& hooks = {});

/// Building blocks of one iteration, exposed for testing.
namespace ga {

struct Context {
    const DiscoveryConfig& config;
    Gateway* gateway;  // may be null when only evaluating
    Evaluator& evaluator;
};

std::vector<Individual> initial_population(Context& ctx);
/// Evaluates every unevaluated individual on `instances`, in parallel up to eval_workers.
void evaluate_all(Context& ctx, std::vector<Individual*> pending, const std::vector<EvalInstance>& instances);
std::vector<Individual> make_offspring(Context& ctx, const Partition& parts, int iteration);
/// Replaces each elite by its mutant iff the mutant's fitness is strictly
/// lower. Evaluated mutants are appended to `tried`.
std::vector<Individual> mutate_elites(Context& ctx, std::vector<Individual> elites, int iteration,
                                      const std::vector<EvalInstance>& instances, std::vector<Individual>& tried);
/// Mutation kind drawn for elite slot `slot` in `iteration`.
CreationKind draw_mutation_kind(std::uint64_t master_seed, int iteration, int slot);
/// Finalists for validation: last elites plus the all-time top `top` by training fitness.
std::vector<Individual> finalists(const GaResult& result, int n_elite, int top);

} // namespace ga

struct ValidationEntry {
    std::string id;
    double mean_objective = kDisqualified;
    std::vector<double> objectives;
    std::string status;
};

struct ValidationResult {
    Individual best;
    std::vector<ValidationEntry> entries;  // same order as the candidates
};

/// Re-evaluates `candidates` on `instances` and picks the lowest mean objective
/// (lambda = 0); ties go to the earlier candidate. Throws DiscoveryFailure
/// when every candidate fails.
ValidationResult select_best_by_validation(const std::vector<Individual>& candidates,
                                           const std::vector<EvalInstance>& instances, Evaluator& evaluator,
                                           double per_instance_time, std::optional<std::int64_t> max_iterations,
                                           int workers = 1);

nlohmann::json to_json(const ValidationResult& v);

} // namespace vrpagent
