#include "vrpagent/cli/commands.hpp"

#include "vrpagent/instances/instance_file.hpp"
#include "vrpagent/model/feasibility.hpp"
#include "vrpagent/operators/builtin.hpp"
#include "vrpagent/util/digest.hpp"
#include "vrpagent/util/rng.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <mutex>
#include <numeric>
#include <sstream>
#include <thread>

namespace vrpagent {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

template <class F>
auto as_config_error(const std::string& what, F&& f) {
    try {
        return f();
    } catch (const ConfigError&) {
        throw;
    } catch (const std::invalid_argument& e) {
        throw ConfigError(what + ": " + e.what());
    } catch (const json::exception& e) {
        throw ConfigError(what + ": " + e.what());
    }
}

void reject_unknown(const json& j, std::initializer_list<std::string_view> known, const std::string& section) {
    if (!j.is_object()) {
        throw ConfigError("section '" + section + "' must be an object");
    }
    for (const auto& [key, _] : j.items()) {
        if (std::find(known.begin(), known.end(), key) == known.end()) {
            throw ConfigError("unknown key '" + key + "' in section '" + section + "'");
        }
    }
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out << text;
    if (!out) {
        throw std::runtime_error("cannot write " + path.string());
    }
}

void write_json(const fs::path& path, const json& j) { write_text(path, j.dump(2) + "\n"); }

std::string utc_stamp() {
    std::time_t now = std::time(nullptr);
    std::tm tm{};
    gmtime_r(&now, &tm);
    std::ostringstream s;
    s << std::put_time(&tm, "%Y%m%dT%H%M%SZ");
    return s.str();
}

/// Explicit directories must be new or empty.
void claim_dir(const fs::path& dir) {
    if (fs::exists(dir) && !fs::is_empty(dir)) {
        throw ConfigError("refusing to overwrite non-empty directory " + dir.string());
    }
    fs::create_directories(dir);
}

std::string file_label(std::string text) {
    for (char& ch : text) {
        if (!std::isalnum(static_cast<unsigned char>(ch)) && ch != '-' && ch != '_' && ch != '.') {
            ch = '_';
        }
    }
    return text;
}

struct BenchInstance {
    std::string id;
    fs::path path;
    ProblemKind kind;
};

std::vector<BenchInstance> resolve_bench_instances(const std::vector<fs::path>& inputs, const std::string& split) {
    std::vector<fs::path> files;
    for (const auto& p : inputs) {
        if (fs::is_directory(p)) {
            std::vector<fs::path> found;
            for (const auto& e : fs::directory_iterator(p)) {
                if (e.path().extension() == ".vrp") {
                    found.push_back(e.path());
                }
            }
            std::sort(found.begin(), found.end());
            files.insert(files.end(), found.begin(), found.end());
        } else if (p.extension() == ".json") {
            SplitManifest m = load_manifest(p);
            for (const auto& e : m.split(split)) {
                files.push_back(m.resolve(e));
            }
        } else if (fs::is_regular_file(p)) {
            files.push_back(p);
        } else {
            throw ConfigError("instance path not found: " + p.string());
        }
    }
    if (files.empty()) {
        throw ConfigError("no instances given");
    }
    std::vector<BenchInstance> out;
    for (const auto& f : files) {
        Instance inst = load_instance(f);
        out.push_back({f.stem().string(), f, inst.kind()});
        if (inst.kind() != out.front().kind) {
            throw ConfigError("mismatched instance formats: " + f.string() + " is " + std::string(to_string(inst.kind())) +
                              ", " + out.front().path.string() + " is " + std::string(to_string(out.front().kind)));
        }
    }
    return out;
}

json stats_json(const RunStats& s) {
    return {{"iterations", s.iterations},
            {"initial_objective", s.initial_objective},
            {"best_objective", s.best_objective},
            {"accepted", s.accepted_count},
            {"improved", s.improved_count},
            {"validations", s.validations},
            {"validation_failures", s.validation_failures},
            {"elapsed_s", s.elapsed},
            {"iterations_per_second", s.iterations_per_second()}};
}

std::vector<EvalInstance> manifest_instances(const InstanceSource& src, const SplitManifest& m, const std::string& split,
                                             std::uint64_t master, std::uint64_t cap) {
    auto all = eval_instances(m, split, master);
    if (cap > 0 && all.size() > cap) {
        all.resize(cap);
    }
    (void)src;
    return all;
}

std::unique_ptr<Provider> make_provider(const DiscoveryConfig& c) {
    if (c.provider == "mock") {
        return MockProvider::corpus(default_mock_corpus(), c.master_seed);
    }
    try {
        return std::make_unique<HttpProvider>(http_settings_from_env());
    } catch (const LlmError& e) {
        throw ConfigError(e.what());
    }
}

} // namespace

json to_json(const LnsConfig& c) {
    return {{"time_limit", c.time_limit},
            {"max_iterations", c.max_iterations ? json(*c.max_iterations) : json(nullptr)},
            {"seed", c.seed},
            {"sa_initial_temp", c.sa_initial_temp ? json(*c.sa_initial_temp) : json(nullptr)},
            {"sa_final_temp", c.sa_final_temp ? json(*c.sa_final_temp) : json(nullptr)},
            {"record_trace", c.record_trace},
            {"validate_every", c.validate_every}};
}

LnsConfig lns_config_from_json(const json& j) {
    reject_unknown(j,
                   {"time_limit", "max_iterations", "seed", "sa_initial_temp", "sa_final_temp", "record_trace",
                    "validate_every"},
                   "lns");
    return as_config_error("lns", [&] {
        LnsConfig c;
        c.time_limit = j.value("time_limit", c.time_limit);
        if (j.contains("max_iterations") && !j["max_iterations"].is_null()) {
            c.max_iterations = j["max_iterations"].get<std::int64_t>();
        }
        c.seed = j.value("seed", c.seed);
        if (j.contains("sa_initial_temp") && !j["sa_initial_temp"].is_null()) {
            c.sa_initial_temp = j["sa_initial_temp"].get<double>();
        }
        if (j.contains("sa_final_temp") && !j["sa_final_temp"].is_null()) {
            c.sa_final_temp = j["sa_final_temp"].get<double>();
        }
        c.record_trace = j.value("record_trace", c.record_trace);
        c.validate_every = j.value("validate_every", c.validate_every);
        c.check();
        return c;
    });
}

json to_json(const RunConfigFile& c) {
    return {{"lns", to_json(c.lns)},
            {"gen", to_json(c.gen)},
            {"discovery", to_json(c.discovery)},
            {"instances",
             {{"manifest", c.instances.manifest.string()},
              {"train_split", c.instances.train_split},
              {"validation_split", c.instances.validation_split},
              {"train_count", c.instances.train_count},
              {"validation_count", c.instances.validation_count},
              {"max_train", c.instances.max_train},
              {"max_validation", c.instances.max_validation}}},
            {"evaluator",
             {{"cache_dir", c.evaluator.cache_dir.string()},
              {"workers", c.evaluator.workers},
              {"preflight", c.evaluator.preflight},
              {"memoize", c.evaluator.memoize}}}};
}

RunConfigFile run_config_from_json(const json& j) {
    reject_unknown(j, {"lns", "gen", "discovery", "instances", "evaluator"}, "top level");
    RunConfigFile c;
    if (j.contains("lns")) {
        c.lns = lns_config_from_json(j["lns"]);
    }
    if (j.contains("gen")) {
        c.gen = as_config_error("gen", [&] { return gen_params_from_json(j["gen"]); });
    }
    if (j.contains("discovery")) {
        c.discovery = as_config_error("discovery", [&] { return discovery_config_from_json(j["discovery"]); });
    }
    if (j.contains("instances")) {
        const json& s = j["instances"];
        reject_unknown(s,
                       {"manifest", "train_split", "validation_split", "train_count", "validation_count", "max_train",
                        "max_validation"},
                       "instances");
        as_config_error("instances", [&] {
            c.instances.manifest = s.value("manifest", std::string());
            c.instances.train_split = s.value("train_split", c.instances.train_split);
            c.instances.validation_split = s.value("validation_split", c.instances.validation_split);
            c.instances.train_count = s.value("train_count", c.instances.train_count);
            c.instances.validation_count = s.value("validation_count", c.instances.validation_count);
            c.instances.max_train = s.value("max_train", c.instances.max_train);
            c.instances.max_validation = s.value("max_validation", c.instances.max_validation);
            return 0;
        });
    }
    if (j.contains("evaluator")) {
        const json& s = j["evaluator"];
        reject_unknown(s, {"cache_dir", "workers", "preflight", "memoize"}, "evaluator");
        as_config_error("evaluator", [&] {
            c.evaluator.cache_dir = s.value("cache_dir", std::string());
            c.evaluator.workers = s.value("workers", c.evaluator.workers);
            c.evaluator.preflight = s.value("preflight", c.evaluator.preflight);
            c.evaluator.memoize = s.value("memoize", c.evaluator.memoize);
            return 0;
        });
    }
    return c;
}

RunConfigFile load_run_config(const fs::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("cannot read config file " + path.string());
    }
    json j;
    try {
        j = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError("config file " + path.string() + " is not valid JSON: " + e.what());
    }
    return run_config_from_json(j);
}

fs::path make_output_dir(const fs::path& root, const std::string& command, const json& resolved_config) {
    std::string digest = sha256_hex(resolved_config.dump()).substr(0, 12);
    fs::create_directories(root);
    fs::path base = root / (command + "-" + digest + "-" + utc_stamp());
    fs::path dir = base;
    for (int k = 2; !fs::create_directory(dir); ++k) {
        dir = base;
        dir += "-" + std::to_string(k);
    }
    write_json(dir / "config.json", resolved_config);
    return dir;
}

double gap_percent(double mean_a, double mean_b) { return (mean_a - mean_b) / mean_b * 100.0; }

SolveOutcome cmd_solve(const SolveOptions& opts, std::ostream& log) {
    OperatorPair ops = as_config_error("operators", [&] { return make_builtin_pair(opts.remove, opts.order); });
    as_config_error("lns", [&] {
        opts.lns.check();
        return 0;
    });
    if (!fs::is_regular_file(opts.instance)) {
        throw ConfigError("instance file not found: " + opts.instance.string());
    }
    Instance instance = [&] {
        try {
            return load_instance(opts.instance);
        } catch (const InstanceFormatError& e) {
            throw ConfigError("instance " + opts.instance.string() + ": " + e.what());
        }
    }();

    json config = {{"command", "solve"},
                   {"instance", fs::absolute(opts.instance).string()},
                   {"instance_sha256", sha256_file(opts.instance)},
                   {"remove", opts.remove},
                   {"order", opts.order},
                   {"lns", to_json(opts.lns)}};

    SolveOutcome out{{}, run_lns(instance, ops, opts.lns)};
    if (out.result.status != RunStatus::ok) {
        throw std::runtime_error("operator failure: " + out.result.failure);
    }
    FeasibilityReport rep = validate(out.result.best);
    if (!rep.feasible) {
        throw std::runtime_error("solver produced an infeasible solution: " + rep.violations.front().detail);
    }
    if (!opts.out_dir.empty()) {
        claim_dir(opts.out_dir);
        out.dir = opts.out_dir;
        write_json(out.dir / "config.json", config);
    } else {
        out.dir = make_output_dir(opts.out_root, "solve", config);
    }
    std::vector<int> unassigned(out.result.best.unassigned().begin(), out.result.best.unassigned().end());
    std::sort(unassigned.begin(), unassigned.end());
    write_json(out.dir / "solution.json", {{"instance", instance.name()},
                                           {"problem", to_string(instance.kind())},
                                           {"objective", out.result.best.objective()},
                                           {"tours", out.result.best.tour_lists()},
                                           {"unassigned", unassigned}});
    write_json(out.dir / "stats.json", stats_json(out.result.stats));
    std::ofstream trace(out.dir / "trace.csv");
    write_trace(trace, out.result.stats);

    log << "objective " << format_real(out.result.best.objective()) << "\n";
    log << "iterations " << out.result.stats.iterations << " (" << std::fixed << std::setprecision(0)
        << out.result.stats.iterations_per_second() << " it/s)\n";
    log.unsetf(std::ios::fixed);
    log << std::setprecision(6) << "output " << out.dir.string() << "\n";
    return out;
}

SplitManifest cmd_gen(const GenOptions& opts, std::ostream& log) {
    as_config_error("gen", [&] {
        opts.params.check();
        return 0;
    });
    if (opts.count == 0) {
        throw ConfigError("count must be positive");
    }
    json config = {{"command", "gen"},
                   {"gen", to_json(opts.params)},
                   {"count", opts.count},
                   {"validation", opts.validation}};
    fs::path dir;
    if (!opts.out_dir.empty()) {
        claim_dir(opts.out_dir);
        dir = opts.out_dir;
        write_json(dir / "config.json", config);
    } else {
        dir = make_output_dir(opts.out_root, "gen", config);
    }
    SplitManifest m = as_config_error(
        "gen", [&] { return make_splits(opts.params.seed, {opts.count, opts.validation}, opts.params, dir); });
    log << "generated " << m.train.size() << " train and " << m.validation.size() << " validation instances in "
        << dir.string() << "\n";
    return m;
}

BenchPair parse_pair(const std::string& text) {
    auto colon = text.find(':');
    if (colon == std::string::npos) {
        throw ConfigError("operator pair must look like remove:order, got '" + text + "'");
    }
    BenchPair p{text.substr(0, colon), text.substr(colon + 1)};
    as_config_error("pair", [&] { return make_builtin_pair(p.remove, p.order); });
    return p;
}

BenchOutcome cmd_bench(const BenchOptions& opts, std::ostream& log) {
    if (opts.pairs.empty() && opts.sources.empty()) {
        throw ConfigError("bench needs at least one operator pair or source");
    }
    if (opts.repetitions < 1 || opts.jobs < 1) {
        throw ConfigError("repetitions and jobs must be positive");
    }
    as_config_error("lns", [&] {
        opts.lns.check();
        return 0;
    });
    auto instances = as_config_error("instances", [&] { return resolve_bench_instances(opts.instances, opts.split); });

    BenchOutcome out;
    std::vector<std::string> source_texts;
    for (const auto& p : opts.pairs) {
        out.labels.push_back(p.label());
    }
    for (const auto& s : opts.sources) {
        std::ifstream in(s);
        if (!in) {
            throw ConfigError("cannot read operator source " + s.string());
        }
        source_texts.emplace_back(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
        out.labels.push_back("source:" + s.stem().string());
    }

    json config = {{"command", "bench"}, {"lns", to_json(opts.lns)}, {"repetitions", opts.repetitions},
                   {"labels", out.labels}, {"split", opts.split},    {"trace", opts.trace}};
    json inst_json = json::array();
    for (const auto& i : instances) {
        inst_json.push_back({{"id", i.id}, {"path", fs::absolute(i.path).string()}, {"sha256", sha256_file(i.path)}});
    }
    config["instances"] = inst_json;
    out.dir = make_output_dir(opts.out_root, "bench", config);
    if (opts.trace) {
        fs::create_directories(out.dir / "traces");
    }

    auto seed_of = [&](const BenchInstance& inst, int rep) {
        return derive_seed(opts.lns.seed, stream_tag("bench/" + inst.id), static_cast<std::uint64_t>(rep));
    };

    // built-in pairs run in-process, one task per (pair, instance, repetition)
    struct Task {
        std::size_t pair;
        std::size_t inst;
        int rep;
    };
    std::vector<Task> tasks;
    for (std::size_t p = 0; p < opts.pairs.size(); ++p) {
        for (std::size_t i = 0; i < instances.size(); ++i) {
            for (int r = 0; r < opts.repetitions; ++r) {
                tasks.push_back({p, i, r});
            }
        }
    }
    std::vector<BenchRow> rows(tasks.size());
    std::atomic<std::size_t> next{0};
    std::mutex error_mutex;
    std::exception_ptr error;
    auto worker = [&] {
        for (std::size_t k = next++; k < tasks.size(); k = next++) {
            try {
                const Task& t = tasks[k];
                const BenchInstance& bi = instances[t.inst];
                Instance inst = load_instance(bi.path);
                LnsConfig cfg = opts.lns;
                cfg.seed = seed_of(bi, t.rep);
                cfg.record_trace = opts.trace;
                LnsResult r = run_lns(inst, make_builtin_pair(opts.pairs[t.pair].remove, opts.pairs[t.pair].order), cfg);
                if (r.status != RunStatus::ok) {
                    throw std::runtime_error(out.labels[t.pair] + " failed on " + bi.id + ": " + r.failure);
                }
                BenchRow& row = rows[k];
                row.instance = bi.id;
                row.pair = out.labels[t.pair];
                row.repetition = t.rep;
                row.seed = cfg.seed;
                row.objective = r.best.objective();
                row.initial_objective = r.stats.initial_objective;
                row.iterations = r.stats.iterations;
                row.elapsed = r.stats.elapsed;
                row.iterations_per_second = r.stats.iterations_per_second();
                row.feasible = validate(r.best).feasible;
                if (opts.trace) {
                    fs::path dir = out.dir / "traces" / file_label(row.pair);
                    fs::create_directories(dir);
                    std::ofstream f(dir / (file_label(bi.id) + "-r" + std::to_string(t.rep) + ".csv"));
                    write_trace(f, r.stats);
                }
            } catch (...) {
                std::lock_guard lock(error_mutex);
                if (!error) {
                    error = std::current_exception();
                }
                next = tasks.size();
            }
        }
    };
    std::vector<std::thread> threads;
    for (int j = 1; j < std::min<int>(opts.jobs, static_cast<int>(tasks.size())); ++j) {
        threads.emplace_back(worker);
    }
    worker();
    for (auto& t : threads) {
        t.join();
    }
    if (error) {
        std::rethrow_exception(error);
    }

    // candidate sources go through the sandboxed evaluator
    if (!source_texts.empty()) {
        EvaluatorSettings es;
        es.cache_dir = opts.cache_dir.empty() ? opts.out_root / "cache" : opts.cache_dir;
        es.workers = opts.jobs;
        Evaluator evaluator(es);
        for (std::size_t s = 0; s < source_texts.size(); ++s) {
            const std::string& label = out.labels[opts.pairs.size() + s];
            for (int r = 0; r < opts.repetitions; ++r) {
                EvalManifest m;
                m.source = source_texts[s];
                m.per_instance_time = opts.lns.time_limit;
                m.max_iterations = opts.lns.max_iterations;
                for (const auto& bi : instances) {
                    m.instances.push_back({bi.id, fs::absolute(bi.path), seed_of(bi, r)});
                }
                EvalReport rep = evaluator.evaluate(m);
                if (rep.status != EvalStatus::ok) {
                    throw std::runtime_error(label + " failed: " + std::string(to_string(rep.status)) + ": " +
                                             rep.detail);
                }
                for (std::size_t i = 0; i < instances.size(); ++i) {
                    BenchRow row;
                    row.instance = instances[i].id;
                    row.pair = label;
                    row.repetition = r;
                    row.seed = m.instances[i].seed;
                    row.objective = rep.per_instance[i].objective;
                    row.initial_objective = initial_solution(load_instance(instances[i].path)).objective();
                    row.iterations = rep.per_instance[i].iterations;
                    row.feasible = rep.per_instance[i].feasible;
                    rows.push_back(row);
                }
            }
        }
    }
    out.rows = std::move(rows);

    std::ostringstream csv;
    csv << "instance,pair,repetition,seed,objective,initial_objective,iterations,elapsed_s,iterations_per_second,"
           "feasible\n";
    for (const auto& r : out.rows) {
        csv << r.instance << ',' << r.pair << ',' << r.repetition << ',' << r.seed << ',' << format_real(r.objective)
            << ',' << format_real(r.initial_objective) << ',' << r.iterations << ',' << r.elapsed << ','
            << r.iterations_per_second << ',' << (r.feasible ? 1 : 0) << '\n';
    }
    write_text(out.dir / "results.csv", csv.str());

    json summary = {{"labels", out.labels}, {"per_label", json::array()}};
    for (const auto& label : out.labels) {
        double sum = 0.0;
        double ips = 0.0;
        double improvement = 0.0;
        int n = 0;
        for (const auto& r : out.rows) {
            if (r.pair == label) {
                sum += r.objective;
                ips += r.iterations_per_second;
                improvement += (r.initial_objective - r.objective) / r.initial_objective;
                ++n;
            }
        }
        out.means.push_back(sum / n);
        summary["per_label"].push_back({{"label", label},
                                        {"runs", n},
                                        {"mean_objective", sum / n},
                                        {"mean_iterations_per_second", ips / n},
                                        {"mean_improvement", improvement / n}});
    }
    out.gap.assign(out.labels.size(), std::vector<double>(out.labels.size(), 0.0));
    for (std::size_t a = 0; a < out.labels.size(); ++a) {
        for (std::size_t b = 0; b < out.labels.size(); ++b) {
            out.gap[a][b] = gap_percent(out.means[a], out.means[b]);
        }
    }
    summary["gap_percent"] = out.gap;
    write_json(out.dir / "summary.json", summary);

    log << std::left << std::setw(32) << "operators" << std::setw(16) << "mean objective" << std::setw(16)
        << "gap vs first" << "it/s\n";
    for (std::size_t a = 0; a < out.labels.size(); ++a) {
        std::ostringstream gap;
        gap << std::fixed << std::setprecision(3) << out.gap[a][0] << "%";
        std::ostringstream mean;
        mean << std::fixed << std::setprecision(4) << out.means[a];
        std::ostringstream ips;
        ips << std::fixed << std::setprecision(0) << summary["per_label"][a]["mean_iterations_per_second"].get<double>();
        log << std::setw(32) << out.labels[a] << std::setw(16) << mean.str() << std::setw(16) << gap.str() << ips.str()
            << "\n";
    }
    log << std::right << "output " << out.dir.string() << "\n";
    return out;
}

DiscoverOutcome cmd_discover(const DiscoverOptions& opts, std::ostream& log) {
    DiscoverOutcome out;
    RunConfigFile cfg = opts.config;
    bool resume = !opts.resume_dir.empty();
    if (resume) {
        cfg = load_run_config(opts.resume_dir / "config.json");
        out.dir = opts.resume_dir;
    }
    DiscoveryConfig& dc = cfg.discovery;
    std::unique_ptr<Provider> provider = make_provider(dc);

    if (!resume) {
        if (dc.train.empty() && !cfg.instances.manifest.empty()) {
            SplitManifest m = as_config_error("instances", [&] { return load_manifest(cfg.instances.manifest); });
            if (m.params.kind != dc.problem) {
                throw ConfigError("manifest instances are " + std::string(to_string(m.params.kind)) +
                                  " but discovery.problem is " + std::string(to_string(dc.problem)));
            }
            dc.train = manifest_instances(cfg.instances, m, cfg.instances.train_split, dc.master_seed,
                                          cfg.instances.max_train);
            if (dc.validation.empty()) {
                dc.validation = manifest_instances(cfg.instances, m, cfg.instances.validation_split, dc.master_seed,
                                                   cfg.instances.max_validation);
            }
        }
        bool generate = dc.train.empty();
        if (generate && cfg.gen.kind != dc.problem) {
            throw ConfigError("gen.problem and discovery.problem differ");
        }
        if (!generate) {
            as_config_error("discovery", [&] {
                dc.check();
                return 0;
            });
        }
        out.dir = make_output_dir(opts.out_root, "discover", to_json(cfg));
        if (generate) {
            SplitManifest m = make_splits(cfg.gen.seed, {cfg.instances.train_count, cfg.instances.validation_count},
                                          cfg.gen, fs::absolute(out.dir / "instances"));
            dc.train = manifest_instances(cfg.instances, m, "train", dc.master_seed, cfg.instances.max_train);
            dc.validation =
                manifest_instances(cfg.instances, m, "validation", dc.master_seed, cfg.instances.max_validation);
            for (auto* set : {&dc.train, &dc.validation}) {
                for (auto& e : *set) {
                    e.path = fs::absolute(e.path);
                }
            }
            as_config_error("discovery", [&] {
                dc.check();
                return 0;
            });
        }
        if (cfg.evaluator.cache_dir.empty()) {
            cfg.evaluator.cache_dir = fs::absolute(opts.out_root / "cache");
        }
        write_json(out.dir / "config.json", to_json(cfg));
    }

    EvaluatorSettings es;
    es.cache_dir = cfg.evaluator.cache_dir;
    es.workers = cfg.evaluator.workers;
    es.preflight = cfg.evaluator.preflight;
    es.memoize = cfg.evaluator.memoize;
    Evaluator evaluator(es);
    Gateway gateway(std::move(provider), dc.llm);

    GaHooks hooks;
    hooks.on_generation = [&](const GenerationRecord& g) {
        log << (g.final ? "final" : "iteration " + std::to_string(g.iteration)) << ": population "
            << g.population.size() << ", elite min " << g.elite_min << ", best " << g.best_id << " ("
            << g.best_fitness << ")\n";
    };
    out.ga = ga_run(dc, gateway, evaluator, out.dir / "ga", resume, hooks);

    out.selected = out.ga.best;
    if (!dc.validation.empty()) {
        auto finalists = ga::finalists(out.ga, dc.n_elite, dc.finalists_top);
        out.validation = select_best_by_validation(finalists, dc.validation, evaluator, dc.per_instance_time,
                                                   dc.max_iterations, cfg.evaluator.workers);
        out.selected = out.validation->best;
    }
    const fs::path source_file = out.dir / "best_operator.cpp";
    write_text(source_file, out.selected.source);

    json generations = json::array();
    for (const auto& g : out.ga.generations) {
        generations.push_back({{"iteration", g.iteration},
                               {"final", g.final},
                               {"population", g.population.size()},
                               {"elite_min", g.elite_min},
                               {"best_id", g.best_id},
                               {"best_fitness", g.best_fitness}});
    }
    json report = {{"selected_id", out.selected.id},
                   {"selected_source", source_file.string()},
                   {"selected_training_fitness", out.selected.fitness ? json(*out.selected.fitness) : json(nullptr)},
                   {"selected_line_count", out.selected.line_count},
                   {"training_best_id", out.ga.best.id},
                   {"training_best_fitness", *out.ga.best.fitness},
                   {"validation", out.validation ? to_json(*out.validation) : json(nullptr)},
                   {"generations", generations},
                   {"provider", gateway.provider_name()},
                   {"model", dc.llm.model},
                   {"usage", gateway.ledger().to_json()},
                   {"resumed_after", out.ga.resumed_after}};
    write_json(out.dir / "report.json", report);
    write_json(out.dir / "usage.json", gateway.ledger().to_json());
    log << "selected " << out.selected.id << " -> " << source_file.string() << "\n";
    log << "tokens in " << gateway.ledger().total().input_tokens << ", out " << gateway.ledger().total().output_tokens
        << ", cost $" << gateway.ledger().cost() << "\n";
    return out;
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"VRP heuristic search and operator discovery"};
    app.require_subcommand(1);
    app.set_version_flag("--version", "vrpagent 1.0");

    // solve
    SolveOptions solve;
    std::string solve_config;
    double time_limit = 10.0;
    std::int64_t iterations = 0;
    std::uint64_t seed = 0;
    auto* s = app.add_subcommand("solve", "Run the LNS on one instance");
    s->add_option("instance", solve.instance, "Instance file")->required();
    auto* s_remove = s->add_option("--remove", solve.remove, "Removal operator label");
    auto* s_order = s->add_option("--order", solve.order, "Order operator label");
    auto* s_time = s->add_option("--time-limit", time_limit, "Seconds");
    auto* s_iter = s->add_option("--iterations", iterations, "Iteration budget");
    auto* s_seed = s->add_option("--seed", seed, "Random seed");
    s->add_option("--config", solve_config, "Run config file (lns section)");
    s->add_option("--out", solve.out_dir, "Output directory (must not exist)");
    s->add_option("--out-root", solve.out_root, "Parent of generated output directories");
    (void)s_remove;
    (void)s_order;

    // gen
    GenOptions gen;
    std::string gen_config;
    std::string gen_problem;
    auto* g = app.add_subcommand("gen", "Generate random instances and a split manifest");
    auto* g_problem = g->add_option("--problem", gen_problem, "cvrp, vrptw or pcvrp");
    auto* g_n = g->add_option("--n", gen.params.n, "Customers per instance");
    auto* g_seed = g->add_option("--seed", gen.params.seed, "Master seed");
    auto* g_cap = g->add_option("--capacity", gen.params.capacity, "Vehicle capacity");
    g->add_option("--count", gen.count, "Training instances");
    g->add_option("--validation", gen.validation, "Validation instances");
    g->add_option("--config", gen_config, "Run config file (gen section)");
    g->add_option("--out", gen.out_dir, "Output directory (must not exist)");
    g->add_option("--out-root", gen.out_root, "Parent of generated output directories");

    // bench
    BenchOptions bench;
    std::vector<std::string> pair_texts;
    std::vector<std::string> bench_remove;
    std::vector<std::string> bench_order;
    std::string bench_config;
    auto* b = app.add_subcommand("bench", "Compare operator pairs on an instance set");
    b->add_option("instances", bench.instances, "Instance files, directories or manifest.json")->required();
    b->add_option("--pair", pair_texts, "Operator pair remove:order (repeatable)");
    b->add_option("--remove", bench_remove, "Removal label, paired with --order");
    b->add_option("--order", bench_order, "Order label, paired with --remove");
    b->add_option("--source", bench.sources, "Candidate operator source file (repeatable)");
    b->add_option("--split", bench.split, "Split to use from a manifest");
    auto* b_time = b->add_option("--time-limit", time_limit, "Seconds per run");
    auto* b_iter = b->add_option("--iterations", iterations, "Iteration budget per run");
    auto* b_seed = b->add_option("--seed", seed, "Master seed");
    b->add_option("--repetitions", bench.repetitions, "Runs per instance and pair");
    b->add_option("--jobs", bench.jobs, "Parallel runs");
    b->add_flag("--trace", bench.trace, "Write per-run best-objective traces");
    b->add_option("--config", bench_config, "Run config file (lns section)");
    b->add_option("--out-root", bench.out_root, "Parent of generated output directories");
    b->add_option("--cache", bench.cache_dir, "Evaluator cache for --source");

    // discover
    DiscoverOptions disc;
    std::string disc_config;
    std::string provider;
    int ga_iterations = 0;
    auto* d = app.add_subcommand("discover", "Evolve operator code with the GA");
    d->add_option("--config", disc_config, "Run config file");
    d->add_option("--resume", disc.resume_dir, "Resume the run in this directory");
    auto* d_provider = d->add_option("--provider", provider, "mock or http");
    auto* d_iter = d->add_option("--iterations", ga_iterations, "GA iterations");
    auto* d_seed = d->add_option("--seed", seed, "Master seed");
    d->add_option("--out-root", disc.out_root, "Parent of generated output directories");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitConfig;
    }

    auto apply_lns_flags = [&](LnsConfig& lns, CLI::Option* t, CLI::Option* it, CLI::Option* sd) {
        if (t->count()) {
            lns.time_limit = time_limit;
        }
        if (it->count()) {
            lns.max_iterations = iterations;
        }
        if (sd->count()) {
            lns.seed = seed;
        }
    };

    try {
        if (s->parsed()) {
            if (!solve_config.empty()) {
                solve.lns = load_run_config(solve_config).lns;
            }
            apply_lns_flags(solve.lns, s_time, s_iter, s_seed);
            cmd_solve(solve, out);
        } else if (g->parsed()) {
            GenParams flags = gen.params;
            if (!gen_config.empty()) {
                gen.params = load_run_config(gen_config).gen;
            }
            if (g_problem->count()) {
                gen.params.kind = as_config_error("--problem", [&] { return parse_problem_kind(gen_problem); });
            }
            if (g_n->count()) {
                gen.params.n = flags.n;
            }
            if (g_seed->count()) {
                gen.params.seed = flags.seed;
            }
            if (g_cap->count()) {
                gen.params.capacity = flags.capacity;
            }
            cmd_gen(gen, out);
        } else if (b->parsed()) {
            if (!bench_config.empty()) {
                bench.lns = load_run_config(bench_config).lns;
            }
            apply_lns_flags(bench.lns, b_time, b_iter, b_seed);
            for (const auto& p : pair_texts) {
                bench.pairs.push_back(parse_pair(p));
            }
            if (bench_remove.size() != bench_order.size()) {
                throw ConfigError("--remove and --order must be given the same number of times");
            }
            for (std::size_t i = 0; i < bench_remove.size(); ++i) {
                bench.pairs.push_back(parse_pair(bench_remove[i] + ":" + bench_order[i]));
            }
            cmd_bench(bench, out);
        } else if (d->parsed()) {
            if (disc.resume_dir.empty()) {
                if (disc_config.empty()) {
                    throw ConfigError("discover needs --config or --resume");
                }
                disc.config = load_run_config(disc_config);
                if (d_provider->count()) {
                    disc.config.discovery.provider = provider;
                }
                if (d_iter->count()) {
                    disc.config.discovery.iterations = ga_iterations;
                }
                if (d_seed->count()) {
                    disc.config.discovery.master_seed = seed;
                }
            } else if (!disc_config.empty() || d_provider->count() || d_iter->count() || d_seed->count()) {
                throw ConfigError("--resume takes its configuration from the run directory");
            }
            cmd_discover(disc, out);
        }
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kExitRuntime;
    }
    return kExitOk;
}

} // namespace vrpagent
