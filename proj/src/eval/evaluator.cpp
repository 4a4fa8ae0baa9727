#include "vrpagent/eval/evaluator.hpp"

#include "vrpagent/eval/subprocess.hpp"
#include "vrpagent/instances/generator.hpp"
#include "vrpagent/instances/instance_file.hpp"
#include "vrpagent/model/feasibility.hpp"
#include "vrpagent/util/digest.hpp"
#include "vrpagent/util/rng.hpp"

#include <atomic>
#include <cmath>
#include <fstream>
#include <sstream>
#include <thread>
#include <unistd.h>

#ifndef VRPAGENT_CXX
#error "VRPAGENT_CXX must name the candidate compiler"
#endif

namespace vrpagent {

namespace fs = std::filesystem;

namespace {

std::atomic<std::uint64_t> g_scratch_counter{0};

fs::path unique_dir(const fs::path& parent, const std::string& stem) {
    fs::path dir = parent / (stem + "-" + std::to_string(::getpid()) + "-" + std::to_string(g_scratch_counter++));
    fs::create_directories(dir);
    return dir;
}

void write_file(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    out << text;
    if (!out) {
        throw std::runtime_error("cannot write " + path.string());
    }
}

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

struct Outcome {
    EvalStatus status = EvalStatus::ok;
    InstanceOutcome result;
    std::string detail;
};

Outcome judge(const ProcessResult& proc, const EvalInstance& task) {
    Outcome o;
    o.result.id = task.id;
    auto fail = [&](EvalStatus s, std::string why) {
        o.status = s;
        o.detail = task.id + ": " + std::move(why);
        return o;
    };
    if (proc.timed_out) {
        return fail(EvalStatus::timeout, proc.describe());
    }
    if (proc.output_overflow) {
        return fail(EvalStatus::invalid_output, proc.describe());
    }
    std::vector<ChildRecord> records;
    std::istringstream lines(proc.out);
    std::string line;
    while (std::getline(lines, line)) {
        if (line.empty()) {
            continue;
        }
        try {
            records.push_back(parse_record(line));
        } catch (const std::exception& e) {
            if (proc.signal != 0 || proc.exit_code != 0) {
                break;
            }
            return fail(EvalStatus::invalid_output, e.what());
        }
    }
    for (const auto& r : records) {
        if (r.type == "error") {
            return fail(EvalStatus::runtime_error, r.kind + " error: " + r.message);
        }
    }
    if (proc.signal != 0 || proc.exit_code != 0) {
        std::string why = proc.describe();
        if (!proc.err.empty()) {
            why += "; stderr: " + proc.err.substr(0, 500);
        }
        return fail(EvalStatus::runtime_error, why);
    }
    if (records.size() != 1 || records[0].id != task.id) {
        return fail(EvalStatus::invalid_output, "expected exactly one result record for this instance");
    }
    const ChildRecord& r = records[0];
    if (!r.feasible) {
        return fail(EvalStatus::invalid_output, "runner reported an infeasible solution");
    }
    Instance inst = load_instance(task.path);
    FeasibilityReport check = validate_routes(inst, r.tours);
    if (!check.feasible) {
        return fail(EvalStatus::invalid_output,
                    "returned solution fails validation: " + std::string(to_string(check.violations.front().kind)));
    }
    double recomputed = objective(inst, r.tours);
    if (std::abs(recomputed - r.objective) > 1e-6 * std::max(1.0, std::abs(recomputed))) {
        return fail(EvalStatus::invalid_output, "reported objective does not match its tours");
    }
    o.result.objective = recomputed;
    o.result.feasible = true;
    o.result.iterations = r.iterations;
    return o;
}

} // namespace

std::string_view to_string(EvalStatus s) {
    switch (s) {
    case EvalStatus::ok:
        return "ok";
    case EvalStatus::compile_error:
        return "compile_error";
    case EvalStatus::runtime_error:
        return "runtime_error";
    case EvalStatus::timeout:
        return "timeout";
    case EvalStatus::invalid_output:
        return "invalid_output";
    }
    return "?";
}

EvalStatus parse_eval_status(std::string_view s) {
    for (EvalStatus e : {EvalStatus::ok, EvalStatus::compile_error, EvalStatus::runtime_error, EvalStatus::timeout,
                         EvalStatus::invalid_output}) {
        if (to_string(e) == s) {
            return e;
        }
    }
    throw std::invalid_argument("unknown eval status '" + std::string(s) + "'");
}

void EvalManifest::check() const {
    if (instances.empty()) {
        throw std::invalid_argument("evaluation manifest lists no instances");
    }
    if (!(per_instance_time > 0.0) || !(build_timeout > 0.0) || memory_limit == 0) {
        throw std::invalid_argument("evaluation limits must be positive");
    }
    if (max_iterations && *max_iterations <= 0) {
        throw std::invalid_argument("max_iterations must be positive");
    }
    if (source.empty()) {
        throw std::invalid_argument("candidate source is empty");
    }
}

std::vector<EvalInstance> eval_instances(const SplitManifest& splits, const std::string& split,
                                         std::uint64_t master_seed) {
    std::vector<EvalInstance> out;
    const auto& entries = splits.split(split);
    for (std::size_t i = 0; i < entries.size(); ++i) {
        out.push_back({entries[i].id, splits.resolve(entries[i]), derive_seed(master_seed, stream_tag("eval/" + split), i)});
    }
    return out;
}

double EvalReport::mean_objective() const {
    if (per_instance.empty()) {
        return kDisqualified;
    }
    double sum = 0.0;
    for (const auto& p : per_instance) {
        sum += p.objective;
    }
    return sum / static_cast<double>(per_instance.size());
}

nlohmann::json to_json(const EvalReport& r) {
    nlohmann::json per = nlohmann::json::array();
    for (const auto& p : r.per_instance) {
        per.push_back({{"id", p.id}, {"objective", p.objective}, {"feasible", p.feasible}, {"iterations", p.iterations}});
    }
    return {{"status", std::string(to_string(r.status))},
            {"per_instance", per},
            {"detail", r.detail},
            {"build_log", r.build_log},
            {"artifact", r.artifact_digest},
            {"shim_version", r.shim_version}};
}

EvalReport eval_report_from_json(const nlohmann::json& j) {
    EvalReport r;
    r.status = parse_eval_status(j.at("status").get<std::string>());
    for (const auto& p : j.at("per_instance")) {
        r.per_instance.push_back({p.at("id").get<std::string>(), p.at("objective").get<double>(),
                                  p.at("feasible").get<bool>(), p.at("iterations").get<std::int64_t>()});
    }
    r.detail = j.value("detail", std::string());
    r.build_log = j.value("build_log", std::string());
    r.artifact_digest = j.value("artifact", std::string());
    r.shim_version = j.value("shim_version", kShimVersion);
    return r;
}

double fitness_from_report(const EvalReport& report, int line_count, double lambda) {
    if (report.status != EvalStatus::ok || report.per_instance.empty()) {
        return kDisqualified;
    }
    for (const auto& p : report.per_instance) {
        if (!p.feasible || !std::isfinite(p.objective)) {
            return kDisqualified;
        }
    }
    return report.mean_objective() + lambda * static_cast<double>(line_count);
}

Evaluator::Evaluator(EvaluatorSettings settings) : settings_(std::move(settings)) {
    if (settings_.cache_dir.empty()) {
        throw std::invalid_argument("evaluator needs a cache directory");
    }
    if (settings_.workers < 1) {
        throw std::invalid_argument("evaluator needs at least one worker");
    }
    fs::create_directories(settings_.cache_dir / "artifacts");
    fs::create_directories(settings_.cache_dir / "failed");
    fs::create_directories(settings_.cache_dir / "scratch");
}

std::vector<std::string> Evaluator::compile_command() {
    return {VRPAGENT_CXX, "-std=c++20", "-O2", "-I" VRPAGENT_SHIM_INCLUDE};
}

std::string Evaluator::artifact_digest(const std::string& source) {
    std::string key = source;
    key += '\0';
    key += "shim=" + std::to_string(kShimVersion);
    for (const auto& part : compile_command()) {
        key += '\0';
        key += part;
    }
    return sha256_hex(key);
}

BuildResult Evaluator::build(const std::string& source, double timeout) {
    BuildResult out;
    out.digest = artifact_digest(source);
    fs::path final_dir = settings_.cache_dir / "artifacts" / out.digest;
    fs::path artifact = final_dir / "runner";
    fs::path failed_log = settings_.cache_dir / "failed" / (out.digest + ".log");

    std::lock_guard lock(build_mutex_);
    if (fs::exists(artifact)) {
        out.ok = true;
        out.cache_hit = true;
        out.artifact = artifact;
        out.log = read_file(final_dir / "build.log");
        return out;
    }
    if (fs::exists(failed_log)) {
        out.cache_hit = true;
        out.log = read_file(failed_log);
        return out;
    }
    if (::access(VRPAGENT_CXX, X_OK) != 0) {
        throw EnvironmentError(std::string("candidate compiler not found: ") + VRPAGENT_CXX);
    }

    fs::path scratch = unique_dir(settings_.cache_dir / "scratch", "build-" + out.digest.substr(0, 12));
    write_file(scratch / "candidate.cpp", source);
    std::vector<std::string> argv = compile_command();
    argv.push_back((scratch / "candidate.cpp").string());
    argv.push_back(VRPAGENT_SHIM_RUNTIME_LIB);
    argv.push_back(VRPAGENT_CORE_LIB);
    argv.push_back(VRPAGENT_CRYPTO_LIB);
    argv.push_back("-pthread");
    argv.push_back("-o");
    argv.push_back((scratch / "runner").string());

    ProcessLimits limits;
    limits.timeout = timeout;
    limits.max_stderr = 1u << 20;
    ProcessResult proc = run_process(argv, limits, scratch);
    out.log = proc.err + proc.out;
    out.timed_out = proc.timed_out;
    if (proc.timed_out) {
        out.log += "\nbuild timed out after " + std::to_string(timeout) + " s";
    }
    if (proc.ok()) {
        fs::create_directories(final_dir);
        write_file(final_dir / "build.log", out.log);
        fs::rename(scratch / "runner", artifact);
        out.ok = true;
        out.artifact = artifact;
    } else if (!proc.timed_out) {
        if (proc.signal != 0 && proc.out.empty() && proc.err.empty()) {
            fs::remove_all(scratch);
            throw EnvironmentError("compiler crashed: " + proc.describe());
        }
        write_file(failed_log, out.log);
    }
    fs::remove_all(scratch);
    return out;
}

fs::path Evaluator::preflight_instance(ProblemKind kind) {
    fs::path path = settings_.cache_dir / ("preflight-" + std::string(to_string(kind)) + "-n20.vrp");
    std::lock_guard lock(build_mutex_);
    if (!fs::exists(path)) {
        GenParams p;
        p.kind = kind;
        p.n = 20;
        p.seed = 0;
        fs::path tmp = unique_dir(settings_.cache_dir / "scratch", "preflight") / "i.vrp";
        save_instance(generate(p), tmp);
        fs::rename(tmp, path);
        fs::remove_all(tmp.parent_path());
    }
    return path;
}

EvalReport Evaluator::run_instances(const BuildResult& build, const EvalManifest& manifest,
                                    const std::vector<EvalInstance>& instances, double time_limit,
                                    std::optional<std::int64_t> max_iterations) {
    fs::path scratch = unique_dir(settings_.cache_dir / "scratch", "run-" + build.digest.substr(0, 12));
    std::vector<Outcome> outcomes(instances.size());
    std::vector<char> ran(instances.size(), 0);
    std::atomic<std::size_t> next{0};
    std::atomic<bool> stop{false};

    auto worker = [&] {
        while (!stop) {
            std::size_t i = next++;
            if (i >= instances.size()) {
                return;
            }
            const EvalInstance& task = instances[i];
            ChildManifest cm;
            cm.tasks.push_back({task.id, fs::absolute(task.path), task.seed});
            cm.time_limit = time_limit;
            cm.max_iterations = max_iterations;
            fs::path manifest_path = scratch / ("task-" + std::to_string(i) + ".json");
            write_file(manifest_path, to_json(cm).dump());
            ProcessLimits limits;
            limits.timeout = time_limit * 1.1 + 1.0;
            limits.memory_bytes = manifest.memory_limit;
            Outcome o;
            try {
                ProcessResult proc = run_process({build.artifact.string(), manifest_path.string()}, limits);
                o = judge(proc, task);
            } catch (const std::exception& e) {
                o.status = EvalStatus::runtime_error;
                o.detail = task.id + ": " + e.what();
            }
            outcomes[i] = std::move(o);
            ran[i] = 1;
            if (outcomes[i].status != EvalStatus::ok) {
                stop = true;
            }
        }
    };
    int workers = std::min<int>(settings_.workers, static_cast<int>(instances.size()));
    std::vector<std::thread> pool;
    for (int w = 1; w < workers; ++w) {
        pool.emplace_back(worker);
    }
    worker();
    for (auto& t : pool) {
        t.join();
    }
    fs::remove_all(scratch);

    EvalReport report;
    report.artifact_digest = build.digest;
    report.build_log = build.log;
    report.cache_hit = build.cache_hit;
    for (std::size_t i = 0; i < instances.size(); ++i) {
        if (!ran[i]) {
            continue;
        }
        if (outcomes[i].status != EvalStatus::ok) {
            if (report.status == EvalStatus::ok) {
                report.status = outcomes[i].status;
                report.detail = outcomes[i].detail;
            }
            continue;
        }
        report.per_instance.push_back(outcomes[i].result);
    }
    if (report.status == EvalStatus::ok && report.per_instance.size() != instances.size()) {
        report.status = EvalStatus::runtime_error;
        report.detail = "evaluation stopped early";
    }
    return report;
}

EvalReport Evaluator::evaluate(const EvalManifest& manifest) {
    manifest.check();
    BuildResult b = build(manifest.source, manifest.build_timeout);
    if (!b.ok) {
        EvalReport r;
        r.status = EvalStatus::compile_error;
        r.build_log = b.log;
        r.artifact_digest = b.digest;
        r.cache_hit = b.cache_hit;
        r.detail = b.timed_out ? "build timed out" : "build failed";
        return r;
    }

    std::string memo_key;
    if (settings_.memoize && manifest.max_iterations) {
        nlohmann::json key{{"artifact", b.digest},
                           {"time", manifest.per_instance_time},
                           {"iterations", *manifest.max_iterations},
                           {"memory", manifest.memory_limit}};
        for (const auto& inst : manifest.instances) {
            key["instances"].push_back({inst.id, fs::absolute(inst.path).string(), inst.seed});
        }
        memo_key = sha256_hex(key.dump());
        std::lock_guard lock(memo_mutex_);
        if (auto it = memo_.find(memo_key); it != memo_.end()) {
            EvalReport r = it->second;
            r.cache_hit = true;
            return r;
        }
    }

    if (settings_.preflight) {
        fs::path pf = preflight_instance(load_instance(manifest.instances.front().path).kind());
        EvalReport pre = run_instances(b, manifest, {{"preflight", pf, 0}}, settings_.preflight_time, std::nullopt);
        if (pre.status != EvalStatus::ok) {
            pre.detail = "preflight: " + pre.detail;
            pre.per_instance.clear();
            return pre;
        }
    }

    EvalReport r = run_instances(b, manifest, manifest.instances, manifest.per_instance_time, manifest.max_iterations);
    if (!memo_key.empty()) {
        std::lock_guard lock(memo_mutex_);
        memo_.emplace(memo_key, r);
    }
    return r;
}

} // namespace vrpagent
