#include "vrpagent/llm/provider.hpp"

namespace vrpagent {

namespace {

const char* const kRandomShuffle = R"(#include "AgentDesigned.h"
#include "Utils.h"

std::vector<int> select_by_llm_1(const Solution& sol) {
    int n = sol.instance.numCustomers;
    int k = std::min(n, getRandomNumber(10, 20));
    std::unordered_set<int> chosen;
    while (static_cast<int>(chosen.size()) < k) {
        chosen.insert(getRandomNumber(1, n));
    }
    return std::vector<int>(chosen.begin(), chosen.end());
}

void sort_by_llm_1(std::vector<int>& customers, const Instance& instance) {
    for (int i = static_cast<int>(customers.size()) - 1; i > 0; --i) {
        std::swap(customers[i], customers[getRandomNumber(0, i)]);
    }
}
)";

const char* const kRadialDemand = R"(#include "AgentDesigned.h"
#include "Utils.h"

std::vector<int> select_by_llm_1(const Solution& sol) {
    const Instance& inst = sol.instance;
    int center = getRandomNumber(1, inst.numCustomers);
    int k = std::min(inst.numCustomers, getRandomNumber(12, 24));
    std::vector<int> out{center};
    for (int v : inst.adj[center]) {
        if (static_cast<int>(out.size()) >= k) {
            break;
        }
        if (v != 0) {
            out.push_back(v);
        }
    }
    return out;
}

void sort_by_llm_1(std::vector<int>& customers, const Instance& instance) {
    std::sort(customers.begin(), customers.end(), [&](int a, int b) {
        if (instance.demand[a] != instance.demand[b]) {
            return instance.demand[a] > instance.demand[b];
        }
        return a < b;
    });
}
)";

const char* const kTourString = R"(#include "AgentDesigned.h"
#include "Utils.h"

std::vector<int> select_by_llm_1(const Solution& sol) {
    const Instance& inst = sol.instance;
    std::vector<int> out;
    int center = getRandomNumber(1, inst.numCustomers);
    for (int v : inst.adj[center]) {
        if (static_cast<int>(out.size()) >= 16) {
            break;
        }
        if (v == 0) {
            continue;
        }
        int t = sol.customerToTourMap[v];
        if (t < 0) {
            out.push_back(v);
            continue;
        }
        const std::vector<int>& tour = sol.tours[t].customers;
        int len = std::min<int>(tour.size(), getRandomNumber(1, 6));
        int start = getRandomNumber(0, static_cast<int>(tour.size()) - len);
        for (int i = start; i < start + len; ++i) {
            out.push_back(tour[i]);
        }
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

void sort_by_llm_1(std::vector<int>& customers, const Instance& instance) {
    std::vector<float> key(customers.size());
    for (size_t i = 0; i < customers.size(); ++i) {
        key[i] = -instance.distanceMatrix[0][customers[i]] + 0.1f * getRandomFraction();
    }
    std::vector<int> idx = argsort(key);
    std::vector<int> sorted;
    for (int i : idx) {
        sorted.push_back(customers[i]);
    }
    customers = sorted;
}
)";

const char* const kRandomDemand = R"(#include "AgentDesigned.h"
#include "Utils.h"

std::vector<int> select_by_llm_1(const Solution& sol) {
    int n = sol.instance.numCustomers;
    int k = std::min(n, getRandomNumber(8, 16));
    std::unordered_set<int> chosen;
    while (static_cast<int>(chosen.size()) < k) {
        chosen.insert(getRandomNumber(1, n));
    }
    std::vector<int> out(chosen.begin(), chosen.end());
    std::sort(out.begin(), out.end());
    return out;
}

void sort_by_llm_1(std::vector<int>& customers, const Instance& instance) {
    std::stable_sort(customers.begin(), customers.end(),
                     [&](int a, int b) { return instance.demand[a] > instance.demand[b]; });
}
)";

const char* const kWideRadial = R"(#include "AgentDesigned.h"
#include "Utils.h"

std::vector<int> select_by_llm_1(const Solution& sol) {
    const Instance& inst = sol.instance;
    int center = getRandomNumber(1, inst.numCustomers);
    int k = std::min(inst.numCustomers, getRandomNumber(15, 30));
    std::vector<int> out{center};
    for (int v : inst.adj[center]) {
        if (static_cast<int>(out.size()) >= k) {
            break;
        }
        if (v != 0 && getRandomFraction() < 0.8f) {
            out.push_back(v);
        }
    }
    return out;
}

void sort_by_llm_1(std::vector<int>& customers, const Instance& instance) {
    for (int i = static_cast<int>(customers.size()) - 1; i > 0; --i) {
        std::swap(customers[i], customers[getRandomNumber(0, i)]);
    }
}
)";

const char* const kBroken = R"(#include "AgentDesigned.h"

std::vector<int> select_by_llm_1(const Solution& sol) {
    return pickCustomers(sol, 12);
}

void sort_by_llm_1(std::vector<int>& customers, const Instance& instance) {}
)";

} // namespace

std::vector<std::string> default_mock_corpus() {
    return {kRandomShuffle, kRadialDemand, kTourString, kRandomDemand, kWideRadial, kBroken};
}

} // namespace vrpagent
