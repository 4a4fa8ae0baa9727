#include <doctest.h>

#include "support/oracles.hpp"
#include "vrpagent/instances/generator.hpp"
#include "vrpagent/lns/lns.hpp"
#include "vrpagent/model/feasibility.hpp"
#include "vrpagent/operators/builtin.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

using namespace vrpagent;

namespace {

Instance make(ProblemKind kind, int n, std::uint64_t seed) {
    GenParams p;
    p.kind = kind;
    p.n = n;
    p.seed = seed;
    return generate(p);
}

LnsConfig iterations(std::int64_t n, std::uint64_t seed = 0) {
    LnsConfig cfg;
    cfg.max_iterations = n;
    cfg.time_limit = 600.0;
    cfg.seed = seed;
    return cfg;
}

} // namespace

TEST_CASE("initial solution has one tour per customer") {
    for (auto kind : {ProblemKind::CVRP, ProblemKind::VRPTW, ProblemKind::PCVRP}) {
        Instance inst = make(kind, 25, 1);
        Solution s = initial_solution(inst);
        CHECK(s.num_tours() == 25);
        CHECK(s.is_complete());
        CHECK(validate(s).feasible);
        double expected = 0.0;
        for (int c = 1; c <= 25; ++c) {
            expected += 2.0 * oracle::euclid(inst, 0, c);
        }
        CHECK(s.objective() == doctest::Approx(expected).epsilon(1e-12));
    }
}

TEST_CASE("sanitize_removal") {
    Instance inst = make(ProblemKind::CVRP, 10, 1);
    Solution s = initial_solution(inst);
    std::vector<int> ids{3};
    s.remove_customers(ids);
    std::vector<int> raw{5, 5, 0, -2, 11, 3, 7, 1, 2, 4, 6};
    CHECK(sanitize_removal(raw, s, 100) == std::vector<int>{5, 7, 1, 2, 4, 6});
    CHECK(sanitize_removal(raw, s, 3) == std::vector<int>{5, 7, 1});

    Instance pc = make(ProblemKind::PCVRP, 10, 1);
    Solution t = initial_solution(pc);
    t.remove_customers(ids);
    CHECK(sanitize_removal(raw, t, 100) == std::vector<int>{5, 3, 7, 1, 2, 4, 6});
}

TEST_CASE("sanitize_order") {
    std::vector<int> removed{8, 3, 5, 1};
    CHECK(sanitize_order(std::vector<int>{5, 5, 42, 1, -1}, removed) == std::vector<int>{5, 1, 3, 8});
    CHECK(sanitize_order(std::vector<int>{}, removed) == std::vector<int>{1, 3, 5, 8});
    CHECK(sanitize_order(std::vector<int>{8, 3, 5, 1}, removed) == std::vector<int>{8, 3, 5, 1});
}

TEST_CASE("property: sanitize_order always yields a permutation of the removed set") {
    Rng rng(4);
    for (int rep = 0; rep < 1000; ++rep) {
        std::vector<int> removed;
        for (int c = 1; c <= 30; ++c) {
            if (rng.uniform01() < 0.3) {
                removed.push_back(c);
            }
        }
        rng.shuffle(removed);
        std::vector<int> raw;
        int len = rng.uniform_int(0, 40);
        for (int i = 0; i < len; ++i) {
            raw.push_back(rng.uniform_int(-5, 35));
        }
        auto out = sanitize_order(raw, removed);
        auto a = out;
        auto b = removed;
        std::sort(a.begin(), a.end());
        std::sort(b.begin(), b.end());
        CHECK(a == b);
    }
}

TEST_CASE("greedy insertion matches exhaustive argmin") {
    int cases = 0;
    int ties = 0;
    for (auto kind : {ProblemKind::CVRP, ProblemKind::VRPTW, ProblemKind::PCVRP}) {
        Rng rng(static_cast<std::uint64_t>(kind) + 1);
        for (int rep = 0; rep < 300; ++rep) {
            Instance inst = make(kind, rng.uniform_int(5, 30), rng.next_u64());
            Solution s = initial_solution(inst);
            LnsConfig cfg = iterations(rng.uniform_int(0, 50), rng.next_u64());
            s = run_lns(inst, make_builtin_pair("seed_random", "random"), cfg).best;
            std::vector<int> drop;
            for (int c = 1; c <= inst.num_customers(); ++c) {
                if (s.is_assigned(c) && rng.uniform01() < 0.3) {
                    drop.push_back(c);
                }
            }
            s.remove_customers(drop);
            if (s.unassigned().empty()) {
                continue;
            }
            int c = s.unassigned()[rng.index(s.unassigned().size())];
            auto lists = s.tour_lists();
            auto want = oracle::best_insertion(inst, lists, c, kTieEpsilon);
            auto got = s.best_insertion(c);
            REQUIRE(got.has_value() == want.found);
            if (!got) {
                continue;
            }
            ++cases;
            CHECK(static_cast<std::size_t>(got->tour) == want.tour);
            CHECK(static_cast<std::size_t>(got->position) == want.pos);
            CHECK(got->delta == doctest::Approx(want.delta).epsilon(1e-9));
            std::size_t within = 0;
            for (std::size_t t = 0; t <= lists.size(); ++t) {
                std::size_t len = t < lists.size() ? lists[t].size() : 0;
                for (std::size_t p = 0; p <= len; ++p) {
                    auto d = oracle::insertion_delta(inst, lists, c, t, p);
                    within += d && *d <= want.delta + kTieEpsilon;
                }
            }
            ties += within > 1;
        }
    }
    CHECK(cases > 800);
    MESSAGE("greedy cases: " << cases << ", with ties: " << ties);
}

TEST_CASE("exact ties go to the lowest tour and position") {
    // Two mirrored customers at equal distance from a third: symmetric positions tie.
    std::vector<NodeData> nodes{{0, 0, 0}, {1, 1, 1}, {1, -1, 1}, {2, 0, 1}};
    Instance inst(ProblemKind::CVRP, 1, nodes);
    Solution s = Solution::from_tours(inst, {{1}, {2}});
    auto best = s.best_insertion(3);
    REQUIRE(best);
    CHECK(best->tour == 2);
    CHECK(best->position == 0);
    CHECK(best->delta == doctest::Approx(2.0 * 2.0));  // capacity 1 forces a new tour
    Instance roomy(ProblemKind::CVRP, 10, nodes);
    Solution r = Solution::from_tours(roomy, {{1}, {2}});
    best = r.best_insertion(3);
    REQUIRE(best);
    CHECK(best->tour == 0);
    CHECK(best->position == 0);
    double via = std::sqrt(2.0) + std::sqrt(2.0) + 2.0 - 2.0 * std::sqrt(2.0);
    CHECK(best->delta == doctest::Approx(via));
}

TEST_CASE("PCVRP reinsertion only adds customers that pay for themselves") {
    NodeData cheap{0.1, 0, 1};
    cheap.prize = 1.0;
    NodeData far{5, 0, 1};
    far.prize = 0.5;
    Instance inst(ProblemKind::PCVRP, 10, {{0, 0, 0}, cheap, far});
    Solution s(inst);
    std::vector<int> order{1, 2};
    greedy_reinsert(s, order);
    CHECK(s.is_assigned(1));
    CHECK_FALSE(s.is_assigned(2));
    CHECK(s.objective() == doctest::Approx(0.2 + 0.5));
}

TEST_CASE("annealing schedule") {
    Annealing a(10.0, 0.1);
    CHECK(a.temperature(0.0) == doctest::Approx(10.0));
    CHECK(a.temperature(1.0) == doctest::Approx(0.1));
    CHECK(a.temperature(0.5) == doctest::Approx(1.0));
    CHECK(a.temperature(2.0) == doctest::Approx(0.1));
    Rng rng(0);
    CHECK(a.accept(5.0, 5.0, 0.3, rng));
    CHECK(a.accept(5.0, 4.0, 0.3, rng));
    CHECK_THROWS_AS(Annealing(0.1, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(Annealing(1.0, 0.0), std::invalid_argument);
}

TEST_CASE("annealing acceptance frequency follows exp(-delta/T)") {
    Rng rng(2024);
    const double temp = 0.37;
    for (double ratio : {0.5, 1.0, 2.0, 4.0}) {
        int hits = 0;
        const int trials = 100000;
        for (int i = 0; i < trials; ++i) {
            hits += Annealing::accept_worse(ratio * temp, temp, rng);
        }
        double freq = hits / double(trials);
        CHECK(std::abs(freq - std::exp(-ratio)) < 0.02);
    }
}

TEST_CASE("run_lns is deterministic under an iteration budget") {
    for (auto kind : {ProblemKind::CVRP, ProblemKind::VRPTW, ProblemKind::PCVRP}) {
        Instance inst = make(kind, 60, 5);
        auto pair = make_builtin_pair("string", "sisr_mix");
        LnsResult a = run_lns(inst, pair, iterations(2000, 3));
        LnsResult b = run_lns(inst, pair, iterations(2000, 3));
        CHECK(a.status == RunStatus::ok);
        CHECK(a.stats.iterations == 2000);
        CHECK(a.best.tour_lists() == b.best.tour_lists());
        CHECK(a.stats.best_objective == b.stats.best_objective);
        CHECK(a.stats.best_objective < a.stats.initial_objective);
        CHECK(a.stats.best_objective == a.best.objective());
        CHECK(validate(a.best).feasible);
        CHECK(std::abs(a.best.objective() - oracle::total_objective(inst, a.best.tour_lists())) < 1e-6);
        for (std::size_t i = 1; i < a.stats.best_objective_trace.size(); ++i) {
            CHECK(a.stats.best_objective_trace[i].objective < a.stats.best_objective_trace[i - 1].objective);
        }
    }
}

TEST_CASE("run_lns respects the wall clock") {
    Instance inst = make(ProblemKind::CVRP, 100, 1);
    LnsConfig cfg;
    cfg.time_limit = 0.3;
    LnsResult r = run_lns(inst, make_builtin_pair("seed_random", "random"), cfg);
    CHECK(r.stats.elapsed >= 0.3);
    CHECK(r.stats.elapsed < 1.0);
    CHECK(r.stats.iterations > 0);
}

TEST_CASE("run_lns reports operator exceptions") {
    Instance inst = make(ProblemKind::CVRP, 30, 1);
    OperatorPair pair = make_builtin_pair("seed_random", "random");
    int calls = 0;
    pair.remove = [&](const Instance&, const Solution&, Rng&) -> std::vector<int> {
        if (++calls == 5) {
            throw std::runtime_error("boom");
        }
        return {1, 2, 3};
    };
    LnsResult r = run_lns(inst, pair, iterations(100));
    CHECK(r.status == RunStatus::operator_failure);
    CHECK(r.failure == "boom");
    CHECK(r.stats.iterations == 4);
    CHECK(validate(r.best).feasible);
}

TEST_CASE("run_lns survives adversarial operators") {
    for (auto kind : {ProblemKind::CVRP, ProblemKind::VRPTW, ProblemKind::PCVRP}) {
        Instance inst = make(kind, 40, 2);
        OperatorPair pair;
        pair.remove = [](const Instance& in, const Solution&, Rng& rng) {
            std::vector<int> out;
            int k = rng.uniform_int(0, 3 * in.num_customers());
            for (int i = 0; i < k; ++i) {
                out.push_back(rng.uniform_int(-3, in.num_customers() + 3));
            }
            return out;
        };
        pair.order = [](const Instance&, std::span<const int> removed, const Solution&, Rng& rng) {
            std::vector<int> out(removed.begin(), removed.end());
            out.insert(out.end(), removed.begin(), removed.end());
            out.push_back(0);
            out.push_back(-7);
            rng.shuffle(out);
            out.resize(out.size() / 2);
            return out;
        };
        LnsConfig cfg = iterations(3000, 1);
        cfg.validate_every = 1;
        LnsResult r = run_lns(inst, pair, cfg);
        CHECK(r.status == RunStatus::ok);
        CHECK(r.stats.validation_failures == 0);
        CHECK(validate(r.best).feasible);
    }
}

TEST_CASE("config checks") {
    LnsConfig cfg;
    cfg.time_limit = 0.0;
    CHECK_THROWS_AS(cfg.check(), std::invalid_argument);
    cfg.time_limit = 1.0;
    cfg.sa_initial_temp = 0.1;
    cfg.sa_final_temp = 1.0;
    CHECK_THROWS_AS(cfg.check(), std::invalid_argument);
}

TEST_CASE("trace csv") {
    RunStats stats;
    stats.best_objective_trace = {{0.0, 10.0, 0}, {0.5, 9.25, 12}};
    std::ostringstream out;
    write_trace(out, stats);
    CHECK(out.str() == "elapsed_s,best_objective,iteration\n0,10,0\n0.5,9.25,12\n");
}

TEST_CASE("brute-force oracle sanity") {
    // Two customers on opposite sides, capacity forces separate tours.
    std::vector<NodeData> nodes{{0, 0, 0}, {1, 0, 6}, {-2, 0, 6}};
    Instance apart(ProblemKind::CVRP, 10, nodes);
    CHECK(oracle::cvrp_optimum(apart) == doctest::Approx(6.0));
    Instance together(ProblemKind::CVRP, 12, nodes);
    CHECK(oracle::cvrp_optimum(together) == doctest::Approx(6.0));
    std::vector<NodeData> line{{0, 0, 0}, {1, 0, 1}, {2, 0, 1}, {3, 0, 1}};
    CHECK(oracle::cvrp_optimum(Instance(ProblemKind::CVRP, 10, line)) == doctest::Approx(6.0));
    CHECK(oracle::cvrp_optimum(Instance(ProblemKind::CVRP, 1, line)) == doctest::Approx(12.0));
}

TEST_CASE("LNS reaches the optimum on tiny instances") {
    int hits = 0;
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        Instance inst = make(ProblemKind::CVRP, 6, seed);
        double opt = oracle::cvrp_optimum(inst);
        LnsResult r = run_lns(inst, make_builtin_pair("seed_random", "random"), iterations(3000, seed));
        CHECK(r.stats.best_objective >= opt - 1e-9);
        hits += r.stats.best_objective <= opt * (1.0 + 1e-9);
    }
    CHECK(hits >= 9);
}
