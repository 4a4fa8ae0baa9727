#include "vrpagent/ga/discovery.hpp"

#include "vrpagent/util/rng.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <fstream>
#include <future>
#include <mutex>
#include <set>
#include <thread>

namespace vrpagent {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr std::array<std::pair<CreationKind, std::string_view>, 6> kKindNames{{
    {CreationKind::init, "init"},
    {CreationKind::crossover, "crossover"},
    {CreationKind::mutation_ablation, "mutation-ablation"},
    {CreationKind::mutation_extend, "mutation-extend"},
    {CreationKind::mutation_adjust, "mutation-adjust"},
    {CreationKind::mutation_refactor, "mutation-refactor"},
}};

std::uint64_t seed_for(std::uint64_t master, std::string_view stream, int iteration, std::uint64_t slot) {
    std::uint64_t tag = stream_tag(stream);
    return derive_seed(derive_seed(master, tag, static_cast<std::uint64_t>(iteration)), tag, slot);
}

json fitness_json(const std::optional<double>& f) {
    if (!f) {
        return nullptr;
    }
    if (*f == kDisqualified) {
        return "disqualified";
    }
    return *f;
}

std::optional<double> fitness_from_json(const json& j) {
    if (j.is_null()) {
        return std::nullopt;
    }
    if (j.is_string()) {
        if (j.get<std::string>() != "disqualified") {
            throw std::invalid_argument("bad fitness value " + j.dump());
        }
        return kDisqualified;
    }
    return j.get<double>();
}

json instance_json(const EvalInstance& e) { return {{"id", e.id}, {"path", e.path.string()}, {"seed", e.seed}}; }

EvalInstance instance_from_json(const json& j) {
    return {j.at("id").get<std::string>(), j.at("path").get<std::string>(), j.at("seed").get<std::uint64_t>()};
}

/// LLM request with bounded retries. Auth and budget errors abort the run;
/// other failures return nothing after the last attempt.
std::optional<std::string> ask(ga::Context& ctx, TemplateId task, const Bindings& bindings, const std::string& purpose,
                               int iteration, std::uint64_t slot, double temperature) {
    std::string last_error;
    for (int attempt = 0; attempt <= ctx.config.llm_retries; ++attempt) {
        std::uint64_t call = seed_for(ctx.config.master_seed, "ga/call/" + purpose, iteration,
                                      slot * 64 + static_cast<std::uint64_t>(attempt));
        try {
            ChatResponse r = ctx.gateway->complete(task, bindings, purpose, call, temperature);
            return extract_code(r.text);
        } catch (const AuthError&) {
            throw;
        } catch (const TokenBudgetExceeded&) {
            throw;
        } catch (const LlmError& e) {
            last_error = e.what();
        } catch (const ExtractionError& e) {
            last_error = e.what();
        }
    }
    spdlog::warn("{} request {} of iteration {} failed after {} attempts: {}", purpose, slot, iteration,
                 ctx.config.llm_retries + 1, last_error);
    return std::nullopt;
}

/// Runs `jobs` concurrently and rethrows the first failure after all finish.
template <class T>
std::vector<T> gather(std::vector<std::future<T>>& jobs) {
    std::vector<T> out;
    std::exception_ptr first;
    for (auto& f : jobs) {
        try {
            out.push_back(f.get());
        } catch (...) {
            if (!first) {
                first = std::current_exception();
            }
            out.emplace_back();
        }
    }
    if (first) {
        std::rethrow_exception(first);
    }
    return out;
}

std::vector<json> read_jsonl(const fs::path& path) {
    std::vector<json> out;
    std::ifstream in(path);
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) {
            continue;
        }
        try {
            out.push_back(json::parse(line));
        } catch (const json::parse_error&) {
            break;  // torn write from an interrupted run
        }
    }
    return out;
}

void write_atomic(const fs::path& path, const std::string& content) {
    fs::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        out << content;
        if (!out) {
            throw std::runtime_error("cannot write " + tmp.string());
        }
    }
    fs::rename(tmp, path);
}

void append_line(const fs::path& path, const json& j) {
    std::ofstream out(path, std::ios::binary | std::ios::app);
    out << j.dump() << '\n';
    out.flush();
    if (!out) {
        throw std::runtime_error("cannot append to " + path.string());
    }
}

const Individual* best_of(const std::vector<Individual>& pool) {
    const Individual* best = nullptr;
    for (const auto& ind : pool) {
        if (ind.evaluated() && (!best || ranks_before(ind, *best))) {
            best = &ind;
        }
    }
    return best;
}

} // namespace

std::string_view to_string(CreationKind k) {
    for (const auto& [kind, name] : kKindNames) {
        if (kind == k) {
            return name;
        }
    }
    return "unknown";
}

CreationKind parse_creation_kind(std::string_view s) {
    for (const auto& [kind, name] : kKindNames) {
        if (name == s) {
            return kind;
        }
    }
    throw std::invalid_argument("unknown creation kind '" + std::string(s) + "'");
}

const std::array<CreationKind, 4>& mutation_kinds() {
    static const std::array<CreationKind, 4> kinds{CreationKind::mutation_ablation, CreationKind::mutation_extend,
                                                   CreationKind::mutation_adjust, CreationKind::mutation_refactor};
    return kinds;
}

TemplateId mutation_template(CreationKind k) {
    switch (k) {
    case CreationKind::mutation_ablation:
        return TemplateId::mutation_ablation;
    case CreationKind::mutation_extend:
        return TemplateId::mutation_extend;
    case CreationKind::mutation_adjust:
        return TemplateId::mutation_adjust;
    case CreationKind::mutation_refactor:
        return TemplateId::mutation_refactor;
    default:
        throw std::invalid_argument("not a mutation kind: " + std::string(to_string(k)));
    }
}

int count_lines(std::string_view source) {
    int count = 0;
    std::size_t pos = 0;
    while (pos <= source.size()) {
        std::size_t end = source.find('\n', pos);
        if (end == std::string_view::npos) {
            end = source.size();
        }
        std::string_view line = source.substr(pos, end - pos);
        if (line.find_first_not_of(" \t\r\f\v") != std::string_view::npos) {
            ++count;
        }
        pos = end + 1;
    }
    return count;
}

Individual make_individual(std::string id, std::string source, CreationKind kind, std::vector<std::string> parents,
                           int generation) {
    Individual ind;
    ind.id = std::move(id);
    ind.source = std::move(source);
    ind.line_count = count_lines(ind.source);
    ind.kind = kind;
    ind.parents = std::move(parents);
    ind.generation = generation;
    return ind;
}

json to_json(const Individual& ind) {
    return {{"id", ind.id},
            {"kind", to_string(ind.kind)},
            {"parents", ind.parents},
            {"generation", ind.generation},
            {"line_count", ind.line_count},
            {"fitness", fitness_json(ind.fitness)},
            {"eval_detail", ind.eval_detail},
            {"eval_status", ind.eval_status},
            {"eval_message", ind.eval_message},
            {"source", ind.source}};
}

Individual individual_from_json(const json& j) {
    Individual ind;
    ind.id = j.at("id").get<std::string>();
    ind.kind = parse_creation_kind(j.at("kind").get<std::string>());
    ind.parents = j.at("parents").get<std::vector<std::string>>();
    ind.generation = j.at("generation").get<int>();
    ind.line_count = j.at("line_count").get<int>();
    ind.fitness = fitness_from_json(j.at("fitness"));
    ind.eval_detail = j.at("eval_detail").get<std::vector<double>>();
    ind.eval_status = j.at("eval_status").get<std::string>();
    ind.eval_message = j.at("eval_message").get<std::string>();
    ind.source = j.at("source").get<std::string>();
    return ind;
}

bool ranks_before(const Individual& a, const Individual& b) {
    auto cls = [](const Individual& x) { return !x.evaluated() ? 2 : x.disqualified() ? 1 : 0; };
    if (cls(a) != cls(b)) {
        return cls(a) < cls(b);
    }
    if (cls(a) == 0 && *a.fitness != *b.fitness) {
        return *a.fitness < *b.fitness;
    }
    if (a.line_count != b.line_count) {
        return a.line_count < b.line_count;
    }
    return a.id < b.id;
}

double fitness(const Individual& ind, const EvalReport& report, double lambda) {
    return fitness_from_report(report, ind.line_count, lambda);
}

void apply_report(Individual& ind, const EvalReport& report, double lambda) {
    ind.fitness = fitness(ind, report, lambda);
    ind.eval_detail.clear();
    for (const auto& p : report.per_instance) {
        ind.eval_detail.push_back(p.objective);
    }
    ind.eval_status = std::string(to_string(report.status));
    ind.eval_message = report.detail;
}

Partition top_k_elite(std::vector<Individual> population, std::size_t k) {
    std::sort(population.begin(), population.end(), ranks_before);
    std::size_t finite = 0;
    for (const auto& ind : population) {
        finite += ind.evaluated() && !ind.disqualified();
    }
    if (finite < k) {
        throw DiscoveryFailure("only " + std::to_string(finite) + " individuals have a finite fitness, need " +
                               std::to_string(k) + " elites");
    }
    Partition p;
    p.elites.assign(std::make_move_iterator(population.begin()),
                    std::make_move_iterator(population.begin() + static_cast<std::ptrdiff_t>(k)));
    p.non_elites.assign(std::make_move_iterator(population.begin() + static_cast<std::ptrdiff_t>(k)),
                        std::make_move_iterator(population.end()));
    return p;
}

void DiscoveryConfig::check() const {
    auto fail = [](const std::string& m) { throw std::invalid_argument("discovery config: " + m); };
    if (n_elite < 1) {
        fail("n_elite must be at least 1");
    }
    if (n_elite >= n_init) {
        fail("n_elite must be smaller than n_init");
    }
    if (n_offspring < 1) {
        fail("n_offspring must be at least 1");
    }
    if (!(crossover_bias > 0.5 && crossover_bias <= 1.0)) {
        fail("crossover_bias must lie in (0.5, 1]");
    }
    if (!(lambda >= 0.0) || !std::isfinite(lambda)) {
        fail("lambda must be finite and non-negative");
    }
    if (iterations < 0) {
        fail("iterations must be non-negative");
    }
    if (train.empty()) {
        fail("no training instances");
    }
    if (!(per_instance_time > 0.0)) {
        fail("per_instance_time must be positive");
    }
    if (max_iterations && *max_iterations < 1) {
        fail("max_iterations must be positive");
    }
    if (llm_retries < 0 || eval_workers < 1 || finalists_top < 0) {
        fail("llm_retries, eval_workers and finalists_top out of range");
    }
    if (provider != "mock" && provider != "http") {
        fail("provider must be mock or http");
    }
    std::set<std::string> train_paths;
    for (const auto& t : train) {
        train_paths.insert(fs::weakly_canonical(t.path).string());
    }
    for (const auto& v : validation) {
        if (train_paths.count(fs::weakly_canonical(v.path).string())) {
            fail("validation instance " + v.id + " is also a training instance");
        }
    }
}

json to_json(const DiscoveryConfig& c) {
    json train = json::array();
    for (const auto& t : c.train) {
        train.push_back(instance_json(t));
    }
    json validation = json::array();
    for (const auto& v : c.validation) {
        validation.push_back(instance_json(v));
    }
    return {{"problem", to_string(c.problem)},
            {"n_init", c.n_init},
            {"n_elite", c.n_elite},
            {"n_offspring", c.n_offspring},
            {"crossover_bias", c.crossover_bias},
            {"standard_crossover", c.standard_crossover},
            {"lambda", c.lambda},
            {"iterations", c.iterations},
            {"mutation_enabled", c.mutation_enabled},
            {"train", train},
            {"validation", validation},
            {"per_instance_time", c.per_instance_time},
            {"max_iterations", c.max_iterations ? json(*c.max_iterations) : json(nullptr)},
            {"resample_train_seeds", c.resample_train_seeds},
            {"llm_retries", c.llm_retries},
            {"eval_workers", c.eval_workers},
            {"finalists_top", c.finalists_top},
            {"master_seed", c.master_seed},
            {"provider", c.provider},
            {"llm",
             {{"model", c.llm.model},
              {"max_concurrent", c.llm.max_concurrent},
              {"token_budget", c.llm.token_budget},
              {"input_rate_per_million", c.llm.rates.input_per_million},
              {"output_rate_per_million", c.llm.rates.output_per_million},
              {"init_temperature", c.llm.init_temperature},
              {"breed_temperature", c.llm.breed_temperature},
              {"max_output_tokens", c.llm.max_output_tokens}}}};
}

DiscoveryConfig discovery_config_from_json(const json& j) {
    if (!j.is_object()) {
        throw std::invalid_argument("discovery config must be a JSON object");
    }
    DiscoveryConfig c;
    for (const auto& [key, v] : j.items()) {
        if (key == "problem") {
            c.problem = parse_problem_kind(v.get<std::string>());
        } else if (key == "n_init") {
            c.n_init = v.get<int>();
        } else if (key == "n_elite") {
            c.n_elite = v.get<int>();
        } else if (key == "n_offspring") {
            c.n_offspring = v.get<int>();
        } else if (key == "crossover_bias") {
            c.crossover_bias = v.get<double>();
        } else if (key == "standard_crossover") {
            c.standard_crossover = v.get<bool>();
        } else if (key == "lambda") {
            c.lambda = v.get<double>();
        } else if (key == "iterations") {
            c.iterations = v.get<int>();
        } else if (key == "mutation_enabled") {
            c.mutation_enabled = v.get<bool>();
        } else if (key == "train" || key == "validation") {
            auto& dst = key == "train" ? c.train : c.validation;
            dst.clear();
            for (const auto& e : v) {
                dst.push_back(instance_from_json(e));
            }
        } else if (key == "per_instance_time") {
            c.per_instance_time = v.get<double>();
        } else if (key == "max_iterations") {
            c.max_iterations = v.is_null() ? std::nullopt : std::optional<std::int64_t>(v.get<std::int64_t>());
        } else if (key == "resample_train_seeds") {
            c.resample_train_seeds = v.get<bool>();
        } else if (key == "llm_retries") {
            c.llm_retries = v.get<int>();
        } else if (key == "eval_workers") {
            c.eval_workers = v.get<int>();
        } else if (key == "finalists_top") {
            c.finalists_top = v.get<int>();
        } else if (key == "master_seed") {
            c.master_seed = v.get<std::uint64_t>();
        } else if (key == "provider") {
            c.provider = v.get<std::string>();
        } else if (key == "llm") {
            for (const auto& [k, x] : v.items()) {
                if (k == "model") {
                    c.llm.model = x.get<std::string>();
                } else if (k == "max_concurrent") {
                    c.llm.max_concurrent = x.get<int>();
                } else if (k == "token_budget") {
                    c.llm.token_budget = x.get<std::int64_t>();
                } else if (k == "input_rate_per_million") {
                    c.llm.rates.input_per_million = x.get<double>();
                } else if (k == "output_rate_per_million") {
                    c.llm.rates.output_per_million = x.get<double>();
                } else if (k == "init_temperature") {
                    c.llm.init_temperature = x.get<double>();
                } else if (k == "breed_temperature") {
                    c.llm.breed_temperature = x.get<double>();
                } else if (k == "max_output_tokens") {
                    c.llm.max_output_tokens = x.get<int>();
                } else {
                    throw std::invalid_argument("unknown key 'llm." + k + "' in discovery config");
                }
            }
        } else {
            throw std::invalid_argument("unknown key '" + key + "' in discovery config");
        }
    }
    return c;
}

std::vector<EvalInstance> training_set(const DiscoveryConfig& c, int iteration) {
    std::vector<EvalInstance> out = c.train;
    if (c.resample_train_seeds) {
        for (std::size_t i = 0; i < out.size(); ++i) {
            out[i].seed = seed_for(c.master_seed, "ga/train-seeds", iteration, i);
        }
    }
    return out;
}

json to_json(const GenerationRecord& g) {
    json pop = json::array();
    for (const auto& ind : g.population) {
        pop.push_back(to_json(ind));
    }
    return {{"iteration", g.iteration},
            {"final", g.final},
            {"elites", g.elites},
            {"elite_min", fitness_json(g.elite_min)},
            {"best_id", g.best_id},
            {"best_fitness", fitness_json(g.best_fitness)},
            {"usage", g.usage},
            {"population", pop}};
}

GenerationRecord generation_from_json(const json& j) {
    GenerationRecord g;
    g.iteration = j.at("iteration").get<int>();
    g.final = j.at("final").get<bool>();
    g.elites = j.at("elites").get<std::vector<std::string>>();
    g.elite_min = fitness_from_json(j.at("elite_min")).value_or(kDisqualified);
    g.best_id = j.at("best_id").get<std::string>();
    g.best_fitness = fitness_from_json(j.at("best_fitness")).value_or(kDisqualified);
    g.usage = j.at("usage");
    for (const auto& ind : j.at("population")) {
        g.population.push_back(individual_from_json(ind));
    }
    return g;
}

namespace ga {

std::vector<Individual> initial_population(Context& ctx) {
    const auto& cfg = ctx.config;
    Bindings b = problem_bindings(cfg.problem);
    std::vector<std::future<std::optional<std::string>>> jobs;
    for (int k = 0; k < cfg.n_init; ++k) {
        jobs.push_back(std::async(std::launch::async, [&ctx, b, k] {
            return ask(ctx, TemplateId::seed, b, "init", 0, static_cast<std::uint64_t>(k),
                       ctx.gateway->settings().init_temperature);
        }));
    }
    auto sources = gather(jobs);
    std::vector<Individual> out;
    for (int k = 0; k < cfg.n_init; ++k) {
        if (sources[static_cast<std::size_t>(k)]) {
            out.push_back(make_individual("i" + std::to_string(k), std::move(*sources[static_cast<std::size_t>(k)]),
                                          CreationKind::init, {}, 0));
        }
    }
    if (static_cast<int>(out.size()) <= cfg.n_elite) {
        throw DiscoveryFailure("initial population has only " + std::to_string(out.size()) + " individuals");
    }
    return out;
}

void evaluate_all(Context& ctx, std::vector<Individual*> pending, const std::vector<EvalInstance>& instances) {
    const auto& cfg = ctx.config;
    std::atomic<std::size_t> next{0};
    std::mutex error_mutex;
    std::exception_ptr error;
    auto worker = [&] {
        for (std::size_t i = next++; i < pending.size(); i = next++) {
            try {
                EvalManifest m;
                m.instances = instances;
                m.per_instance_time = cfg.per_instance_time;
                m.max_iterations = cfg.max_iterations;
                m.source = pending[i]->source;
                apply_report(*pending[i], ctx.evaluator.evaluate(m), cfg.lambda);
            } catch (...) {
                std::lock_guard lock(error_mutex);
                if (!error) {
                    error = std::current_exception();
                }
                next = pending.size();
            }
        }
    };
    std::size_t n_threads = std::min<std::size_t>(static_cast<std::size_t>(cfg.eval_workers), pending.size());
    std::vector<std::thread> threads;
    for (std::size_t t = 1; t < n_threads; ++t) {
        threads.emplace_back(worker);
    }
    worker();
    for (auto& t : threads) {
        t.join();
    }
    if (error) {
        std::rethrow_exception(error);
    }
}

std::vector<Individual> make_offspring(Context& ctx, const Partition& parts, int iteration) {
    const auto& cfg = ctx.config;
    if (parts.elites.empty() || parts.non_elites.empty()) {
        throw DiscoveryFailure("crossover needs elite and non-elite parents");
    }
    Bindings base = problem_bindings(cfg.problem);
    base["bias_percent"] = percent_string(cfg.crossover_bias);
    base["worse_percent"] = percent_string(1.0 - cfg.crossover_bias);
    TemplateId task = cfg.standard_crossover ? TemplateId::crossover_standard : TemplateId::crossover;

    struct Pick {
        const Individual* elite;
        const Individual* other;
    };
    std::vector<Pick> picks;
    for (int k = 0; k < cfg.n_offspring; ++k) {
        Rng rng(seed_for(cfg.master_seed, "ga/crossover-parents", iteration, static_cast<std::uint64_t>(k)));
        const Individual& e = parts.elites[rng.index(parts.elites.size())];
        const Individual& o = parts.non_elites[rng.index(parts.non_elites.size())];
        picks.push_back({&e, &o});
    }
    std::vector<std::future<std::optional<std::string>>> jobs;
    for (int k = 0; k < cfg.n_offspring; ++k) {
        Bindings b = base;
        b["code_parent_1"] = picks[static_cast<std::size_t>(k)].elite->source;
        b["code_parent_2"] = picks[static_cast<std::size_t>(k)].other->source;
        jobs.push_back(std::async(std::launch::async, [&ctx, task, b = std::move(b), iteration, k] {
            return ask(ctx, task, b, "crossover", iteration, static_cast<std::uint64_t>(k),
                       ctx.gateway->settings().breed_temperature);
        }));
    }
    auto sources = gather(jobs);
    std::vector<Individual> out;
    for (int k = 0; k < cfg.n_offspring; ++k) {
        auto& src = sources[static_cast<std::size_t>(k)];
        if (!src) {
            continue;
        }
        const Pick& p = picks[static_cast<std::size_t>(k)];
        out.push_back(make_individual("g" + std::to_string(iteration) + "-c" + std::to_string(k), std::move(*src),
                                      CreationKind::crossover, {p.elite->id, p.other->id}, iteration));
    }
    if (static_cast<int>(out.size()) < cfg.n_offspring) {
        spdlog::warn("iteration {}: brood shrank to {} of {} offspring", iteration, out.size(), cfg.n_offspring);
    }
    return out;
}

CreationKind draw_mutation_kind(std::uint64_t master_seed, int iteration, int slot) {
    Rng rng(seed_for(master_seed, "ga/mutation-kind", iteration, static_cast<std::uint64_t>(slot)));
    return mutation_kinds()[rng.index(mutation_kinds().size())];
}

std::vector<Individual> mutate_elites(Context& ctx, std::vector<Individual> elites, int iteration,
                                      const std::vector<EvalInstance>& instances, std::vector<Individual>& tried) {
    const auto& cfg = ctx.config;
    Bindings base = problem_bindings(cfg.problem);
    std::vector<CreationKind> kinds;
    std::vector<std::future<std::optional<std::string>>> jobs;
    for (std::size_t j = 0; j < elites.size(); ++j) {
        CreationKind kind = draw_mutation_kind(cfg.master_seed, iteration, static_cast<int>(j));
        kinds.push_back(kind);
        Bindings b = base;
        b["code"] = elites[j].source;
        jobs.push_back(std::async(std::launch::async, [&ctx, kind, b = std::move(b), iteration, j] {
            return ask(ctx, mutation_template(kind), b, "mutation", iteration, j,
                       ctx.gateway->settings().breed_temperature);
        }));
    }
    auto sources = gather(jobs);
    std::vector<Individual> mutants;
    std::vector<std::size_t> owner;
    for (std::size_t j = 0; j < elites.size(); ++j) {
        if (sources[j]) {
            mutants.push_back(make_individual("g" + std::to_string(iteration) + "-m" + std::to_string(j),
                                              std::move(*sources[j]), kinds[j], {elites[j].id}, iteration));
            owner.push_back(j);
        }
    }
    std::vector<Individual*> pending;
    for (auto& m : mutants) {
        pending.push_back(&m);
    }
    evaluate_all(ctx, pending, instances);
    for (std::size_t i = 0; i < mutants.size(); ++i) {
        tried.push_back(mutants[i]);
        Individual& elite = elites[owner[i]];
        if (*mutants[i].fitness < *elite.fitness) {
            elite = mutants[i];
        }
    }
    return elites;
}

std::vector<Individual> finalists(const GaResult& result, int n_elite, int top) {
    std::vector<Individual> out;
    std::set<std::string> seen;
    auto add = [&](const Individual& ind) {
        if (ind.evaluated() && !ind.disqualified() && seen.insert(ind.id).second) {
            out.push_back(ind);
        }
    };
    if (!result.generations.empty()) {
        std::vector<Individual> last = result.generations.back().population;
        std::sort(last.begin(), last.end(), ranks_before);
        for (std::size_t i = 0; i < last.size() && static_cast<int>(i) < n_elite; ++i) {
            add(last[i]);
        }
    }
    std::vector<Individual> ranked = result.archive;
    std::stable_sort(ranked.begin(), ranked.end(), ranks_before);
    int taken = 0;
    for (const auto& ind : ranked) {
        if (taken >= top) {
            break;
        }
        if (ind.evaluated() && !ind.disqualified()) {
            add(ind);
            ++taken;
        }
    }
    return out;
}

} // namespace ga

GaResult ga_run(const DiscoveryConfig& config, Gateway& gateway, Evaluator& evaluator, const fs::path& run_dir,
                bool resume, const GaHooks& hooks) {
    config.check();
    fs::create_directories(run_dir);
    const fs::path config_path = run_dir / "config.json";
    const fs::path individuals_path = run_dir / "individuals.jsonl";
    const fs::path generations_path = run_dir / "generations.jsonl";
    const std::string config_text = to_json(config).dump(2) + "\n";

    ga::Context ctx{config, &gateway, evaluator};
    GaResult result;
    std::vector<Individual> population;
    int start = 1;

    std::vector<json> gens = fs::exists(generations_path) ? read_jsonl(generations_path) : std::vector<json>{};
    if (!resume && (fs::exists(generations_path) || fs::exists(individuals_path))) {
        throw std::invalid_argument("run directory " + run_dir.string() + " already holds a run; use resume");
    }
    if (resume && fs::exists(config_path)) {
        std::ifstream in(config_path);
        std::string stored((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
        if (stored != config_text) {
            throw std::invalid_argument("configuration differs from the checkpoint in " + run_dir.string());
        }
    }
    write_atomic(config_path, config_text);

    if (resume && !gens.empty()) {
        for (const auto& g : gens) {
            result.generations.push_back(generation_from_json(g));
        }
        const GenerationRecord& last = result.generations.back();
        std::string kept;
        for (const auto& rec : read_jsonl(individuals_path)) {
            if (rec.at("committed").get<int>() <= last.iteration) {
                result.archive.push_back(individual_from_json(rec.at("individual")));
                kept += rec.dump() + "\n";
            }
        }
        write_atomic(individuals_path, kept);
        std::string gen_text;
        for (const auto& g : gens) {
            gen_text += g.dump() + "\n";
        }
        write_atomic(generations_path, gen_text);
        gateway.ledger().restore(last.usage);
        population = last.population;
        start = last.iteration + 1;
        result.resumed_after = last.iteration;
        spdlog::info("resuming after iteration {}", last.iteration);
        if (last.final) {
            result.best = *best_of(result.archive);
            return result;
        }
    } else {
        write_atomic(individuals_path, "");
        write_atomic(generations_path, "");
        population = ga::initial_population(ctx);
    }

    auto commit = [&](const Individual& ind, int iteration) {
        result.archive.push_back(ind);
        append_line(individuals_path, {{"committed", iteration}, {"individual", to_json(ind)}});
    };
    auto evaluate_pending = [&](int iteration, const std::vector<EvalInstance>& instances) {
        std::vector<Individual*> pending;
        for (auto& ind : population) {
            if (!ind.evaluated()) {
                pending.push_back(&ind);
            }
        }
        ga::evaluate_all(ctx, pending, instances);
        for (auto* ind : pending) {
            commit(*ind, iteration);
        }
    };
    auto record = [&](int iteration, bool final, const std::vector<std::string>& elites, double elite_min) {
        GenerationRecord g;
        g.iteration = iteration;
        g.final = final;
        g.population = population;
        g.elites = elites;
        g.elite_min = elite_min;
        const Individual* best = best_of(result.archive);
        if (best) {
            g.best_id = best->id;
            g.best_fitness = *best->fitness;
        }
        g.usage = gateway.ledger().to_json();
        for (auto& [purpose, entry] : g.usage["by_purpose"].items()) {
            entry.erase("latency_s");  // wall clock; keeps snapshots reproducible
        }
        append_line(generations_path, to_json(g));
        result.generations.push_back(g);
        if (hooks.on_generation) {
            hooks.on_generation(g);
        }
    };

    for (int it = start; it <= config.iterations; ++it) {
        auto instances = training_set(config, it);
        if (config.resample_train_seeds) {
            for (auto& ind : population) {
                ind.fitness.reset();
            }
        }
        evaluate_pending(it, instances);
        Partition parts = top_k_elite(population, static_cast<std::size_t>(config.n_elite));
        std::vector<Individual> offspring = ga::make_offspring(ctx, parts, it);
        std::vector<Individual> elites = std::move(parts.elites);
        if (config.mutation_enabled) {
            std::vector<Individual> tried;
            elites = ga::mutate_elites(ctx, std::move(elites), it, instances, tried);
            for (const auto& m : tried) {
                commit(m, it);
            }
        }
        std::vector<std::string> elite_ids;
        double elite_min = kDisqualified;
        for (const auto& e : elites) {
            elite_ids.push_back(e.id);
            elite_min = std::min(elite_min, *e.fitness);
        }
        population = std::move(elites);
        population.insert(population.end(), std::make_move_iterator(offspring.begin()),
                          std::make_move_iterator(offspring.end()));
        record(it, false, elite_ids, elite_min);
    }

    const int final_it = config.iterations + 1;
    evaluate_pending(final_it, training_set(config, config.iterations > 0 ? config.iterations : 1));
    std::vector<Individual> ranked = population;
    std::sort(ranked.begin(), ranked.end(), ranks_before);
    std::vector<std::string> elite_ids;
    double elite_min = kDisqualified;
    for (std::size_t i = 0; i < ranked.size() && static_cast<int>(i) < config.n_elite; ++i) {
        if (!ranked[i].disqualified()) {
            elite_ids.push_back(ranked[i].id);
            elite_min = std::min(elite_min, *ranked[i].fitness);
        }
    }
    record(final_it, true, elite_ids, elite_min);

    const Individual* best = best_of(result.archive);
    if (!best || best->disqualified()) {
        throw DiscoveryFailure("no individual evaluated successfully");
    }
    result.best = *best;
    return result;
}

ValidationResult select_best_by_validation(const std::vector<Individual>& candidates,
                                           const std::vector<EvalInstance>& instances, Evaluator& evaluator,
                                           double per_instance_time, std::optional<std::int64_t> max_iterations,
                                           int workers) {
    if (candidates.empty()) {
        throw DiscoveryFailure("no candidates for validation");
    }
    if (instances.empty()) {
        throw DiscoveryFailure("no validation instances");
    }
    DiscoveryConfig cfg;
    cfg.lambda = 0.0;
    cfg.per_instance_time = per_instance_time;
    cfg.max_iterations = max_iterations;
    cfg.eval_workers = std::max(1, workers);
    std::vector<Individual> scored = candidates;
    for (auto& c : scored) {
        c.fitness.reset();
    }
    std::vector<Individual*> pending;
    for (auto& c : scored) {
        pending.push_back(&c);
    }
    ga::Context ctx{cfg, nullptr, evaluator};
    ga::evaluate_all(ctx, pending, instances);

    ValidationResult out;
    std::optional<std::size_t> best;
    for (std::size_t i = 0; i < scored.size(); ++i) {
        ValidationEntry e;
        e.id = scored[i].id;
        e.mean_objective = *scored[i].fitness;
        e.objectives = scored[i].eval_detail;
        e.status = scored[i].eval_status;
        out.entries.push_back(e);
        if (e.mean_objective != kDisqualified && (!best || e.mean_objective < out.entries[*best].mean_objective)) {
            best = i;
        }
    }
    if (!best) {
        throw DiscoveryFailure("every finalist failed on the validation instances");
    }
    out.best = candidates[*best];
    return out;
}

json to_json(const ValidationResult& v) {
    json entries = json::array();
    for (const auto& e : v.entries) {
        entries.push_back({{"id", e.id},
                           {"mean_objective", fitness_json(e.mean_objective)},
                           {"objectives", e.objectives},
                           {"status", e.status}});
    }
    return {{"best_id", v.best.id}, {"entries", entries}};
}

} // namespace vrpagent
