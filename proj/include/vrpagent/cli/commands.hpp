#pragma once

#include "vrpagent/eval/evaluator.hpp"
#include "vrpagent/ga/discovery.hpp"
#include "vrpagent/instances/splits.hpp"
#include "vrpagent/lns/lns.hpp"

#include <json.hpp>

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace vrpagent {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitRuntime = 3;

/// Bad flags, config files or missing credentials (exit code 2).
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Where discovery gets its instances: an existing split manifest, or splits
/// generated into the run directory from the `gen` section.
struct InstanceSource {
    std::filesystem::path manifest;  // empty = generate
    std::string train_split = "train";
    std::string validation_split = "validation";
    std::uint64_t train_count = 64;
    std::uint64_t validation_count = 16;
    std::uint64_t max_train = 0;       // 0 = all
    std::uint64_t max_validation = 0;  // 0 = all
};

struct EvaluatorOptions {
    std::filesystem::path cache_dir;  // empty = <out_root>/cache
    int workers = 1;
    bool preflight = true;
    bool memoize = true;  // reuse reports within the process; needs an iteration budget
};

/// Declarative run configuration; every section optional, unknown keys rejected.
struct RunConfigFile {
    LnsConfig lns;
    GenParams gen;
    DiscoveryConfig discovery;
    InstanceSource instances;
    EvaluatorOptions evaluator;
};

nlohmann::json to_json(const LnsConfig& c);
LnsConfig lns_config_from_json(const nlohmann::json& j);
nlohmann::json to_json(const RunConfigFile& c);
/// Throws ConfigError.
RunConfigFile run_config_from_json(const nlohmann::json& j);
RunConfigFile load_run_config(const std::filesystem::path& path);

/// Creates <root>/<command>-<first 12 hex of config digest>-<UTC timestamp>
/// (with a numeric suffix if taken) and writes config.json into it.
std::filesystem::path make_output_dir(const std::filesystem::path& root, const std::string& command,
                                      const nlohmann::json& resolved_config);

/// (mean_a - mean_b) / mean_b * 100.
double gap_percent(double mean_a, double mean_b);

struct SolveOptions {
    std::filesystem::path instance;
    std::string remove = "seed_random";
    std::string order = "random";
    LnsConfig lns;
    std::filesystem::path out_root = "runs";
    std::filesystem::path out_dir;  // explicit directory; must not exist
};

struct SolveOutcome {
    std::filesystem::path dir;
    LnsResult result;
};

/// Writes solution.json, stats.json, trace.csv and config.json.
SolveOutcome cmd_solve(const SolveOptions& opts, std::ostream& log);

struct GenOptions {
    GenParams params;
    std::uint64_t count = 64;
    std::uint64_t validation = 0;
    std::filesystem::path out_dir;  // empty = <out_root>/gen-...
    std::filesystem::path out_root = "runs";
};

SplitManifest cmd_gen(const GenOptions& opts, std::ostream& log);

struct BenchPair {
    std::string remove;
    std::string order;
    std::string label() const { return remove + ":" + order; }
};

/// "remove:order" -> pair. Throws ConfigError.
BenchPair parse_pair(const std::string& text);

struct BenchOptions {
    std::vector<std::filesystem::path> instances;  // files, directories or manifest.json
    std::string split = "train";                    // used for manifests
    std::vector<BenchPair> pairs;
    std::vector<std::filesystem::path> sources;      // candidate operator files, run through the evaluator
    LnsConfig lns;
    int repetitions = 1;
    int jobs = 1;
    bool trace = false;
    std::filesystem::path out_root = "runs";
    std::filesystem::path cache_dir;
};

struct BenchRow {
    std::string instance;
    std::string pair;
    int repetition = 0;
    std::uint64_t seed = 0;
    double objective = 0.0;
    double initial_objective = 0.0;
    std::int64_t iterations = 0;
    double elapsed = 0.0;
    double iterations_per_second = 0.0;
    bool feasible = true;
};

struct BenchOutcome {
    std::filesystem::path dir;
    std::vector<BenchRow> rows;
    std::vector<std::string> labels;
    std::vector<double> means;            // per label
    std::vector<std::vector<double>> gap; // gap[a][b] = gap_percent(mean a, mean b)
};

/// Writes results.csv, summary.json and (with trace) traces/<label>/<instance>-r<k>.csv.
BenchOutcome cmd_bench(const BenchOptions& opts, std::ostream& log);

struct DiscoverOptions {
    RunConfigFile config;
    std::filesystem::path out_root = "runs";
    std::filesystem::path resume_dir;  // non-empty = resume that run
};

struct DiscoverOutcome {
    std::filesystem::path dir;
    GaResult ga;
    std::optional<ValidationResult> validation;
    Individual selected;
};

/// Runs discovery and writes report.json and best_operator.cpp into the run directory.
DiscoverOutcome cmd_discover(const DiscoverOptions& opts, std::ostream& log);

/// Parses argv and dispatches; returns the process exit code.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

} // namespace vrpagent
