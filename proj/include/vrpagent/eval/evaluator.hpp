#pragma once

#include "vrpagent/eval/protocol.hpp"
#include "vrpagent/instances/splits.hpp"

#include <cstdint>
#include <filesystem>
#include <limits>
#include <map>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace vrpagent {

enum class EvalStatus { ok, compile_error, runtime_error, timeout, invalid_output };
std::string_view to_string(EvalStatus s);
EvalStatus parse_eval_status(std::string_view s);

struct EvalInstance {
    std::string id;
    std::filesystem::path path;
    std::uint64_t seed = 0;
};

struct EvalManifest {
    std::vector<EvalInstance> instances;
    double per_instance_time = 20.0;
    std::optional<std::int64_t> max_iterations;  // iteration budget; makes results reproducible
    std::string source;
    std::uint64_t memory_limit = 2ull << 30;
    double build_timeout = 120.0;

    /// Throws std::invalid_argument.
    void check() const;
};

/// Instances of a split with seeds derived from `master_seed`, one per position.
std::vector<EvalInstance> eval_instances(const SplitManifest& splits, const std::string& split,
                                         std::uint64_t master_seed);

struct InstanceOutcome {
    std::string id;
    double objective = 0.0;
    bool feasible = false;
    std::int64_t iterations = 0;
};

struct EvalReport {
    EvalStatus status = EvalStatus::ok;
    std::vector<InstanceOutcome> per_instance;
    std::string build_log;
    std::string detail;            // first failure, human readable
    std::string artifact_digest;
    bool cache_hit = false;
    int shim_version = kShimVersion;

    double mean_objective() const;
};

nlohmann::json to_json(const EvalReport& r);
EvalReport eval_report_from_json(const nlohmann::json& j);

inline constexpr double kDisqualified = std::numeric_limits<double>::infinity();

/// Mean objective + lambda * line_count for ok reports, kDisqualified otherwise.
double fitness_from_report(const EvalReport& report, int line_count, double lambda);

/// Raised when the toolchain itself is unusable (not a candidate fault).
class EnvironmentError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct BuildResult {
    bool ok = false;
    std::filesystem::path artifact;
    std::string digest;
    std::string log;
    bool cache_hit = false;
    bool timed_out = false;
};

struct EvaluatorSettings {
    std::filesystem::path cache_dir;
    int workers = 1;
    bool preflight = true;
    double preflight_time = 1.0;
    /// Reuse reports for an identical (artifact, manifest) pair within this
    /// process. Only sound with an iteration budget.
    bool memoize = true;
};

/// Compiles candidates against the operator shim and runs them in child processes.
class Evaluator {
public:
    explicit Evaluator(EvaluatorSettings settings);

    /// Content-addressed build; identical sources reuse the cached artifact.
    BuildResult build(const std::string& source, double timeout = 120.0);

    EvalReport evaluate(const EvalManifest& manifest);

    /// Compiler invocation used for candidates (without source/output).
    static std::vector<std::string> compile_command();
    /// Digest identifying the artifact of `source`.
    static std::string artifact_digest(const std::string& source);

private:
    EvalReport run_instances(const BuildResult& build, const EvalManifest& manifest,
                             const std::vector<EvalInstance>& instances, double time_limit,
                             std::optional<std::int64_t> max_iterations);
    std::filesystem::path preflight_instance(ProblemKind kind);

    EvaluatorSettings settings_;
    std::mutex build_mutex_;
    std::mutex memo_mutex_;
    std::map<std::string, EvalReport> memo_;
};

} // namespace vrpagent
