#include <doctest.h>

#include "support/oracles.hpp"
#include "vrpagent/eval/evaluator.hpp"
#include "vrpagent/eval/subprocess.hpp"
#include "vrpagent/instances/generator.hpp"
#include "vrpagent/instances/instance_file.hpp"
#include "vrpagent/llm/templates.hpp"

#include <filesystem>

using namespace vrpagent;
namespace fs = std::filesystem;

namespace {

fs::path scratch_root() {
    static fs::path root = [] {
        fs::path p = fs::temp_directory_path() / "vrpagent-test-eval";
        fs::remove_all(p);
        fs::create_directories(p);
        return p;
    }();
    return root;
}

std::vector<EvalInstance> tiny_instances(ProblemKind kind, int count, int n = 25) {
    std::vector<EvalInstance> out;
    for (int i = 0; i < count; ++i) {
        GenParams p;
        p.kind = kind;
        p.n = n;
        p.seed = static_cast<std::uint64_t>(100 + i);
        fs::path path = scratch_root() / (std::string(to_string(kind)) + "-" + std::to_string(i) + ".vrp");
        save_instance(generate(p), path);
        out.push_back({"i" + std::to_string(i), path, static_cast<std::uint64_t>(7 + i)});
    }
    return out;
}

Evaluator& evaluator() {
    static Evaluator ev([] {
        EvaluatorSettings s;
        s.cache_dir = scratch_root() / "cache";
        s.memoize = false;
        return s;
    }());
    return ev;
}

EvalManifest manifest(std::string source, std::vector<EvalInstance> instances, double time = 1.0) {
    EvalManifest m;
    m.source = std::move(source);
    m.instances = std::move(instances);
    m.per_instance_time = time;
    m.max_iterations = 300;
    return m;
}

const std::string kSleeper = R"(#include "AgentDesigned.h"
#include <thread>
#include <chrono>
std::vector<int> select_by_llm_1(const Solution& sol) {
    std::this_thread::sleep_for(std::chrono::hours(1));
    return {1};
}
void sort_by_llm_1(std::vector<int>& customers, const Instance& instance) {}
)";

const std::string kCrasher = R"(#include "AgentDesigned.h"
std::vector<int> select_by_llm_1(const Solution& sol) {
    volatile int* p = nullptr;
    *p = 1;
    return {1};
}
void sort_by_llm_1(std::vector<int>& customers, const Instance& instance) {}
)";

const std::string kThrower = R"(#include "AgentDesigned.h"
#include <stdexcept>
std::vector<int> select_by_llm_1(const Solution& sol) {
    if (getRandomNumber(0, 9) == 0) throw std::runtime_error("unlucky");
    return {1, 2};
}
void sort_by_llm_1(std::vector<int>& customers, const Instance& instance) {}
)";

// Writes a forged result record straight to the protocol descriptor.
const std::string kForger = R"(#include "AgentDesigned.h"
#include <cstdio>
#include <cstdlib>
#include <unistd.h>
std::vector<int> select_by_llm_1(const Solution& sol) {
    const char* line = "{\"type\":\"result\",\"id\":\"i0\",\"objective\":0.5,\"feasible\":true,\"iterations\":1,\"tours\":[[1]]}\n";
    ssize_t n = write(3, line, std::char_traits<char>::length(line));
    (void)n;
    _exit(0);
}
void sort_by_llm_1(std::vector<int>& customers, const Instance& instance) {}
)";

const std::string kChatty = R"(#include "AgentDesigned.h"
#include <iostream>
std::vector<int> select_by_llm_1(const Solution& sol) {
    std::cout << "{\"type\":\"error\"}" << std::endl;
    std::vector<int> out;
    for (int i = 0; i < 3; ++i) out.push_back(getRandomNumber(1, sol.instance.numCustomers));
    return out;
}
void sort_by_llm_1(std::vector<int>& customers, const Instance& instance) {
    std::sort(customers.begin(), customers.end(), [&](int a, int b) { return instance.demand[a] > instance.demand[b]; });
}
)";

} // namespace

TEST_CASE("subprocess basics") {
    ProcessLimits limits;
    limits.timeout = 5.0;
    auto r = run_process({"/bin/sh", "-c", "echo out; echo err >&2; exit 3"}, limits);
    CHECK(r.exit_code == 3);
    CHECK(r.out == "out\n");
    CHECK(r.err == "err\n");
    CHECK_FALSE(r.ok());

    limits.timeout = 0.5;
    r = run_process({"/bin/sh", "-c", "sleep 30 & sleep 30"}, limits);
    CHECK(r.timed_out);
    CHECK(r.elapsed < 3.0);

    limits.timeout = 5.0;
    limits.max_stdout = 1000;
    r = run_process({"/bin/sh", "-c", "yes"}, limits);
    CHECK(r.output_overflow);

    limits.max_stdout = 1 << 20;
    limits.memory_bytes = 64ull << 20;
    r = run_process({"/bin/sh", "-c", "exec python3 -c 'x = bytearray(512 * 1024 * 1024)'"}, limits);
    CHECK_FALSE(r.ok());
}

TEST_CASE("fitness from report") {
    EvalReport r;
    r.per_instance = {{"a", 10.0, true, 1}, {"b", 10.0, true, 1}};
    CHECK(fitness_from_report(r, 100, 2e-4) == doctest::Approx(10.02).epsilon(1e-15));
    r.per_instance = {{"a", 1.0, true, 1}, {"b", 2.0, true, 1}, {"c", 3.0, true, 1}};
    CHECK(fitness_from_report(r, 55, 0.0) == 2.0);
    r.per_instance = {{"a", 41.14, true, 1}};
    CHECK(fitness_from_report(r, 150, 2e-4) == doctest::Approx(41.17).epsilon(1e-12));
    r.status = EvalStatus::compile_error;
    CHECK(fitness_from_report(r, 10, 2e-4) == kDisqualified);
    r.status = EvalStatus::ok;
    r.per_instance[0].feasible = false;
    CHECK(fitness_from_report(r, 10, 2e-4) == kDisqualified);
}

TEST_CASE("report json round trip") {
    EvalReport r;
    r.status = EvalStatus::timeout;
    r.per_instance = {{"a", 0.1 + 0.2, true, 17}};
    r.detail = "x";
    EvalReport back = eval_report_from_json(nlohmann::json::parse(to_json(r).dump()));
    CHECK(back.status == EvalStatus::timeout);
    CHECK(back.per_instance[0].objective == 0.1 + 0.2);
    CHECK(back.per_instance[0].iterations == 17);
}

TEST_CASE("seed operator builds, caches and evaluates") {
    std::string seed(seed_operator_source());
    BuildResult first = evaluator().build(seed);
    REQUIRE_MESSAGE(first.ok, first.log);
    BuildResult second = evaluator().build(seed);
    CHECK(second.ok);
    CHECK(second.cache_hit);
    CHECK(second.digest == first.digest);
    CHECK(second.artifact == first.artifact);

    auto instances = tiny_instances(ProblemKind::CVRP, 4);
    EvalReport r = evaluator().evaluate(manifest(seed, instances));
    REQUIRE_MESSAGE(r.status == EvalStatus::ok, r.detail);
    REQUIRE(r.per_instance.size() == 4);
    for (std::size_t i = 0; i < 4; ++i) {
        CHECK(r.per_instance[i].id == instances[i].id);
        CHECK(r.per_instance[i].feasible);
        CHECK(r.per_instance[i].iterations == 300);
        Instance inst = load_instance(instances[i].path);
        double initial = 0.0;
        for (int c = 1; c <= inst.num_customers(); ++c) {
            initial += 2.0 * oracle::euclid(inst, 0, c);
        }
        CHECK(r.per_instance[i].objective < initial);
    }
}

TEST_CASE("syntax error is a compile error") {
    EvalReport r = evaluator().evaluate(manifest("#include \"AgentDesigned.h\"\nint broken( {\n", tiny_instances(ProblemKind::CVRP, 1)));
    CHECK(r.status == EvalStatus::compile_error);
    CHECK_FALSE(r.build_log.empty());
    EvalReport again = evaluator().evaluate(manifest("#include \"AgentDesigned.h\"\nint broken( {\n", tiny_instances(ProblemKind::CVRP, 1)));
    CHECK(again.status == EvalStatus::compile_error);
    CHECK(again.cache_hit);
}

TEST_CASE("missing operator symbols fail at link time") {
    EvalReport r = evaluator().evaluate(manifest("#include \"AgentDesigned.h\"\n", tiny_instances(ProblemKind::CVRP, 1)));
    CHECK(r.status == EvalStatus::compile_error);
}

TEST_CASE("failure modes map to statuses") {
    auto instances = tiny_instances(ProblemKind::CVRP, 2);
    SUBCASE("sleeping candidate times out within the grace period") {
        EvalManifest m = manifest(kSleeper, instances, 1.0);
        m.max_iterations.reset();
        auto started = std::chrono::steady_clock::now();
        EvalReport r = evaluator().evaluate(m);
        double took = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
        CHECK(r.status == EvalStatus::timeout);
        CHECK(took < 2 * (1.0 * 1.1 + 1.0) + 1.0);  // preflight and one instance, fail-fast skips the rest
    }
    SUBCASE("segfault is a runtime error") {
        EvalReport r = evaluator().evaluate(manifest(kCrasher, instances));
        CHECK(r.status == EvalStatus::runtime_error);
        CHECK(r.detail.find("signal") != std::string::npos);
    }
    SUBCASE("exception is a runtime error") {
        EvalReport r = evaluator().evaluate(manifest(kThrower, instances));
        CHECK(r.status == EvalStatus::runtime_error);
        CHECK(r.detail.find("unlucky") != std::string::npos);
    }
    SUBCASE("forged infeasible record is invalid output") {
        EvaluatorSettings s;
        s.cache_dir = scratch_root() / "cache";
        s.preflight = false;
        s.memoize = false;
        Evaluator ev(s);
        EvalReport r = ev.evaluate(manifest(kForger, instances));
        CHECK(r.status == EvalStatus::invalid_output);
    }
    SUBCASE("candidate stdout does not corrupt the protocol") {
        EvalReport r = evaluator().evaluate(manifest(kChatty, instances));
        CHECK_MESSAGE(r.status == EvalStatus::ok, r.detail);
    }
}

TEST_CASE("crashing candidate does not affect a sibling evaluation") {
    auto instances = tiny_instances(ProblemKind::VRPTW, 2);
    EvalReport bad = evaluator().evaluate(manifest(kCrasher, instances));
    EvalReport good = evaluator().evaluate(manifest(kChatty, instances));
    CHECK(bad.status == EvalStatus::runtime_error);
    CHECK(good.status == EvalStatus::ok);
}

TEST_CASE("evaluation is deterministic under an iteration budget") {
    for (auto kind : {ProblemKind::CVRP, ProblemKind::VRPTW, ProblemKind::PCVRP}) {
        auto instances = tiny_instances(kind, 2, 30);
        EvalReport a = evaluator().evaluate(manifest(kChatty, instances));
        EvalReport b = evaluator().evaluate(manifest(kChatty, instances));
        REQUIRE_MESSAGE(a.status == EvalStatus::ok, a.detail);
        REQUIRE(b.per_instance.size() == a.per_instance.size());
        for (std::size_t i = 0; i < a.per_instance.size(); ++i) {
            CHECK(a.per_instance[i].objective == b.per_instance[i].objective);
        }
    }
}

TEST_CASE("memoized evaluator reuses reports") {
    EvaluatorSettings s;
    s.cache_dir = scratch_root() / "cache";
    Evaluator ev(s);
    auto instances = tiny_instances(ProblemKind::CVRP, 1);
    EvalReport a = ev.evaluate(manifest(kChatty, instances));
    EvalReport b = ev.evaluate(manifest(kChatty, instances));
    CHECK(b.cache_hit);
    CHECK(a.per_instance[0].objective == b.per_instance[0].objective);
}

TEST_CASE("manifest checks") {
    EvalManifest m;
    CHECK_THROWS_AS(m.check(), std::invalid_argument);
    m = manifest("x", tiny_instances(ProblemKind::CVRP, 1));
    m.per_instance_time = 0;
    CHECK_THROWS_AS(m.check(), std::invalid_argument);
}
