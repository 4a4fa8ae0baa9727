#include "AgentDesigned.h"

#include "vrpagent/eval/protocol.hpp"
#include "vrpagent/eval/shim_adapter.hpp"
#include "vrpagent/instances/instance_file.hpp"
#include "vrpagent/lns/lns.hpp"
#include "vrpagent/model/feasibility.hpp"

#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <unistd.h>

static_assert(VRPAGENT_SHIM_VERSION == vrpagent::kShimVersion, "shim header and runtime versions differ");

namespace {

thread_local vrpagent::Rng* g_rng = nullptr;

vrpagent::Rng& rng() {
    thread_local vrpagent::Rng fallback(0);
    return g_rng ? *g_rng : fallback;
}

struct RngScope {
    explicit RngScope(vrpagent::Rng& r) { g_rng = &r; }
    ~RngScope() { g_rng = nullptr; }
};

std::shared_ptr<::Instance> to_shim(const vrpagent::Instance& in) {
    auto out = std::make_shared<::Instance>();
    const int n = in.num_nodes();
    out->numNodes = n;
    out->numCustomers = in.num_customers();
    out->vehicleCapacity = in.capacity();
    out->demand.resize(static_cast<std::size_t>(n));
    out->distanceMatrix.assign(static_cast<std::size_t>(n), std::vector<float>(static_cast<std::size_t>(n)));
    out->nodePositions.resize(static_cast<std::size_t>(n));
    out->adj.resize(static_cast<std::size_t>(n));
    out->startTW.resize(static_cast<std::size_t>(n));
    out->endTW.resize(static_cast<std::size_t>(n));
    out->serviceTime.resize(static_cast<std::size_t>(n));
    out->prizes.resize(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        auto k = static_cast<std::size_t>(i);
        const auto& node = in.node(i);
        out->demand[k] = node.demand;
        out->nodePositions[k] = {static_cast<float>(node.x), static_cast<float>(node.y)};
        for (int j = 0; j < n; ++j) {
            out->distanceMatrix[k][static_cast<std::size_t>(j)] = static_cast<float>(in.dist(i, j));
        }
        auto nb = in.neighbors(i);
        out->adj[k].assign(nb.begin(), nb.end());
        out->startTW[k] = static_cast<float>(node.tw_start);
        out->endTW[k] = static_cast<float>(node.tw_end);
        out->serviceTime[k] = static_cast<float>(node.service_time);
        out->prizes[k] = static_cast<float>(node.prize);
    }
    return out;
}

::Solution to_shim(const ::Instance& inst, const vrpagent::Solution& s) {
    ::Solution out{inst, static_cast<float>(s.objective()), {}, {}};
    out.tours.reserve(static_cast<std::size_t>(s.num_tours()));
    for (const auto& t : s.tours()) {
        out.tours.push_back({t.customers, t.demand, static_cast<float>(t.cost)});
    }
    auto map = s.customer_to_tour();
    out.customerToTourMap.assign(map.begin(), map.end());
    out.customerToTourMap[0] = -1;
    return out;
}

} // namespace

int getRandomNumber(int min, int max) { return rng().uniform_int(min, max); }

float getRandomFraction(float min, float max) {
    return min + (max - min) * static_cast<float>(rng().uniform01());
}

float getRandomFractionFast() { return static_cast<float>(rng().uniform01()); }

std::vector<int> argsort(const std::vector<float>& values) {
    std::vector<int> idx(values.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::stable_sort(idx.begin(), idx.end(), [&](int a, int b) {
        return values[static_cast<std::size_t>(a)] < values[static_cast<std::size_t>(b)];
    });
    return idx;
}

namespace vrpagent {

OperatorPair make_candidate_pair(const Instance& instance) {
    std::shared_ptr<::Instance> shim = to_shim(instance);
    OperatorPair pair;
    pair.label = "candidate";
    pair.origin = OperatorOrigin::external_candidate;
    pair.remove = [shim](const Instance&, const Solution& s, Rng& r) {
        RngScope scope(r);
        return select_by_llm_1(to_shim(*shim, s));
    };
    pair.order = [shim](const Instance&, std::span<const int> removed, const Solution&, Rng& r) {
        RngScope scope(r);
        std::vector<int> ids(removed.begin(), removed.end());
        sort_by_llm_1(ids, *shim);
        return ids;
    };
    return pair;
}

int run_candidate_main(int argc, char** argv) {
    // Keep the protocol stream private; anything the candidate prints goes to stderr.
    int proto_fd = dup(STDOUT_FILENO);
    if (proto_fd < 0 || dup2(STDERR_FILENO, STDOUT_FILENO) < 0) {
        std::perror("dup");
        return 2;
    }
    FILE* proto = fdopen(proto_fd, "w");
    auto emit = [&](const ChildRecord& r) {
        std::string line = format_record(r) + "\n";
        std::fwrite(line.data(), 1, line.size(), proto);
        std::fflush(proto);
    };
    if (argc != 2) {
        std::fprintf(stderr, "usage: %s <manifest.json>\n", argv[0]);
        return 2;
    }
    ChildManifest manifest;
    try {
        std::ifstream in(argv[1]);
        manifest = child_manifest_from_json(nlohmann::json::parse(in));
    } catch (const std::exception& e) {
        emit({"error", "", 0, false, 0, {}, "setup", e.what()});
        return 2;
    }
    for (const auto& task : manifest.tasks) {
        try {
            Instance inst = load_instance(task.path);
            LnsConfig cfg;
            cfg.time_limit = manifest.time_limit;
            cfg.max_iterations = manifest.max_iterations;
            cfg.seed = task.seed;
            cfg.record_trace = false;
            LnsResult res = run_lns(inst, make_candidate_pair(inst), cfg);
            if (res.status != RunStatus::ok) {
                emit({"error", task.id, 0, false, res.stats.iterations, {}, "operator", res.failure});
                return 1;
            }
            bool feasible = validate(res.best, inst).feasible && (inst.collects_prizes() || res.best.is_complete());
            emit({"result", task.id, res.best.objective(), feasible, res.stats.iterations, res.best.tour_lists(), {}, {}});
        } catch (const std::exception& e) {
            emit({"error", task.id, 0, false, 0, {}, "setup", e.what()});
            return 1;
        }
    }
    return 0;
}

} // namespace vrpagent
