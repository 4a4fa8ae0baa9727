#include "prompt_texts.hpp"

namespace vrpagent::prompts {

const std::string_view kSystem = R"PROMPT(You are an operations research expert. Your task is to design new heuristics for an existing **Large Neighborhood Search (LNS)** framework applied to the {problem_name_long}. The framework iteratively improves a given initial solution through the following steps:
1. **Customer Removal**: Select a subset of customers to remove using a specified heuristic.
2. **Solution Perturbation**: Remove the selected customers from their tours. This results in an infeasible solution where the removed customers are no longer served.
3. **Customer Ordering**: Order the removed customers using another heuristic.
4. **Greedy Reinsertion**: Reinsert the removed customers one by one into the tours, following the order defined in step 3.

Your job is to implement **new heuristics for:**
- **Step 1**: Customer selection (`select_by_llm_1`)
- **Step 3**: Ordering of the removed customers (`sort_by_llm_1`)

All other components of the LNS framework are fixed and **cannot be modified**.

# Routing Problem Description
{problem_desc}

# Other implementation notes and requirements:
- The framework is implemented in **C++**.
- The LNS targets **large instances** (e.g., more than 500 customers).
- Only a small number of customers should be removed in each iteration.
- The selected customers do **not need to form a single compact cluster**, but **each selected customer should be close to at least one or a few other selected customers**. This encourages meaningful changes during greedy reinsertion.
- The heuristic must incorporate **stochastic behavior** to ensure sufficient diversity over **millions of iterations**.
- The search is limited by runtime, meaning that the two new heuristics should be very fast.

# Code style
- IMPORTANT: DO NOT ADD ***ANY*** COMMENTS unless asked)PROMPT";

const std::string_view kSeed = R"PROMPT([TASK]
Write high-quality heuristics for `select_by_llm_1` and `sort_by_llm_1` in the LNS framework. Write the full code file in a ```cpp``` code block.

# Example implementation
{seed_code}

# Libary context
You are also provided with some selected header function information with comments that could be useful:
{LNS_headers})PROMPT";

const std::string_view kCrossover = R"PROMPT([Better Code]
{code_parent_1}

[Worse Code]
{code_parent_2}

[Task]
Write new high-quality heuristics for `select_by_llm_1` and `sort_by_llm_1` in the LNS framework. Your implementation
should be a crossover of the two implementations above, taking most ideas from the better code ({bias_percent}%) and only {worse_percent}% from the worse code.
Ensure that the new code maintains a comparable overall complexity and length to the two implementations above.
Output code only and enclose your code with C++ code block: ```cpp ... ```. Do not comment your code.)PROMPT";

const std::string_view kCrossoverStandard = R"PROMPT([Code 1]
{code_parent_1}

[Code 2]
{code_parent_2}

[Task]
Write new high-quality heuristics for `select_by_llm_1` and `sort_by_llm_1` in the LNS framework. Your implementation
should be a crossover of the two implementations above, combining ideas from both implementations in about equal parts.
Ensure that the new code maintains a comparable overall complexity and length to the two implementations above.
Output code only and enclose your code with C++ code block: ```cpp ... ```. Do not comment your code.)PROMPT";

const std::string_view kMutationAblation = R"PROMPT([Code]
{code}

[Task]
To simplify the heuristics implemented in  `select_by_llm_1` and `sort_by_llm_1` we want to conduct an ablation study.
Choose a random mechanic/component from the code that you think might not be important and remove any trace of it from the code. We will
then run your code to evaluate the impact of the removed component. Output code only and enclose your code with C++ code block: ```cpp ... ```.)PROMPT";

const std::string_view kMutationExtend = R"PROMPT([Code]
{code}

[Task]
The goal is improve the heuristics implemented in `select_by_llm_1` and `sort_by_llm_1`.
Add a new mechanic/component to the code above. Be innovative. We will
then run your code to evaluate the impact of the new component. Output code only and enclose your code with C++ code block: ```cpp ... ```.)PROMPT";

const std::string_view kMutationAdjust = R"PROMPT([Code]
{code}

[Task]
The goal is to find new parameter settings for heuristics implemented in `select_by_llm_1` and `sort_by_llm_1`.
Modify the parameters of the code above to improve the effectiveness of the heuristic. If there are magic numbers in the code, replace them with constants that are set at the beginning of each function.
Do not make any other changes to the code.
Output code only and enclose your code with C++ code block: ```cpp ... ```.)PROMPT";

const std::string_view kMutationRefactor = R"PROMPT([Code]
{code}

[Task]
The goal is improve the runtime of the heuristics implemented in `select_by_llm_1` and `sort_by_llm_1`.
Modify the code so that the runtime is reduced. It is ok to slightly change the logic of the heuristic to achieve this.
Output code only and enclose your code with C++ code block: ```cpp ... ```.)PROMPT";

const std::string_view kCvrpDescription = R"PROMPT(The Capacitated Vehicle Routing Problem (CVRP) involves determining a set of delivery routes from a depot to a group of customers, where each customer has a specific demand and each vehicle has a fixed capacity. The objective is to design routes that minimize the total distance traveled, while ensuring that:
Each route starts and ends at the depot.
Each customer is visited exactly once by a single vehicle.
The total demand on any route does not exceed the vehicle capacity.

There is no limit on the number of vehicles that can be used.)PROMPT";

const std::string_view kVrptwDescription = R"PROMPT(The Vehicle Routing Problem with Time Windows (VRPTW) involves determining a set of delivery routes from a depot to a group of customers, where each customer has a demand, a service time and a time window, and each vehicle has a fixed capacity. Vehicles leave the depot at time 0 and travel time equals distance. The objective is to design routes that minimize the total distance traveled, while ensuring that:
Each route starts and ends at the depot.
Each customer is visited exactly once by a single vehicle.
The total demand on any route does not exceed the vehicle capacity.
Service at each customer starts inside its time window. A vehicle that arrives early waits until the window opens, and leaves after the service time has passed.

There is no limit on the number of vehicles that can be used.)PROMPT";

const std::string_view kPcvrpDescription = R"PROMPT(The Prize-Collecting Vehicle Routing Problem (PCVRP) involves determining a set of delivery routes from a depot to a group of customers, where each customer has a demand and a prize, and each vehicle has a fixed capacity. Customers do not have to be visited; the prize of a customer is lost when it is not visited. The objective is to minimize the total distance traveled plus the total prize of the customers that are not visited, while ensuring that:
Each route starts and ends at the depot.
Each visited customer is visited exactly once by a single vehicle.
The total demand on any route does not exceed the vehicle capacity.

There is no limit on the number of vehicles that can be used.)PROMPT";

const std::string_view kCvrpHeaders = R"PROMPT(From `Instance.h`:

```cpp
struct Instance {
    int numNodes; // Total number of nodes including depot
    int numCustomers; // Total number of customers (excluding depot)
    int vehicleCapacity; // Capacity of the vehicle (identical for all vehicles)
    std::vector<int> demand;  // Demand of each node (with the depot at index 0 having a demand of 0)
    std::vector<std::vector<float>> distanceMatrix; //Distance matrix between nodes
    std::vector<std::vector<float>> nodePositions; // Node positions in 2D space
    std::vector<std::vector<int>> adj; // Adjacency list for each node, sorted by distance
}
```

From `Solution.h`:

```cpp
struct Solution {
    const Instance& instance; // Reference to the instance to avoid copying
    float totalCosts; // Total cost of the solution
    std::vector<Tour> tours; // List of tours in the solution
    std::vector<int> customerToTourMap; // Map from each customer to its tour index. This can be used to
    // quickly find which tour a customer belongs to, e.g. solution.tours[solution.customerToTourMap[c]] returns the tour of customer c.
}
```

From `Tour.h`:

```cpp
struct Tour {
    std::vector<int> customers; // Customers in the tour, excluding depot
    int demand = 0; // Total demand of the tour
    float costs = 0;  // Total cost of the tour including distance to and from the depot
}
```

From `Utils.h`:
```cpp
int getRandomNumber(int min, int max);
float getRandomFraction(float min = 0.0, float max = 1.0);
float getRandomFractionFast(); // Function to generate a random fraction (float) in the range [0, 1] using a fast method
std::vector<int> argsort(const std::vector<float>& values); // Function to perform argsort on a vector of float values
```)PROMPT";

const std::string_view kVrptwHeaders = R"PROMPT(From `Instance.h`:

```cpp
struct Instance {
    int numNodes; // Total number of nodes including depot
    int numCustomers; // Total number of customers (excluding depot)
    int vehicleCapacity; // Capacity of the vehicle (identical for all vehicles)
    std::vector<int> demand;  // Demand of each node (with the depot at index 0 having a demand of 0)
    std::vector<std::vector<float>> distanceMatrix; //Distance matrix between nodes
    std::vector<std::vector<float>> nodePositions; // Node positions in 2D space
    std::vector<std::vector<int>> adj; // Adjacency list for each node, sorted by distance
    std::vector<float> startTW; // Earliest service start of each node
    std::vector<float> endTW; // Latest service start of each node
    std::vector<float> serviceTime; // Service duration of each node (0 for the depot)
}
```

From `Solution.h`:

```cpp
struct Solution {
    const Instance& instance; // Reference to the instance to avoid copying
    float totalCosts; // Total cost of the solution
    std::vector<Tour> tours; // List of tours in the solution
    std::vector<int> customerToTourMap; // Map from each customer to its tour index. This can be used to
    // quickly find which tour a customer belongs to, e.g. solution.tours[solution.customerToTourMap[c]] returns the tour of customer c.
}
```

From `Tour.h`:

```cpp
struct Tour {
    std::vector<int> customers; // Customers in the tour, excluding depot
    int demand = 0; // Total demand of the tour
    float costs = 0;  // Total cost of the tour including distance to and from the depot
}
```

From `Utils.h`:
```cpp
int getRandomNumber(int min, int max);
float getRandomFraction(float min = 0.0, float max = 1.0);
float getRandomFractionFast(); // Function to generate a random fraction (float) in the range [0, 1] using a fast method
std::vector<int> argsort(const std::vector<float>& values); // Function to perform argsort on a vector of float values
```)PROMPT";

const std::string_view kPcvrpHeaders = R"PROMPT(From `Instance.h`:

```cpp
struct Instance {
    int numNodes; // Total number of nodes including depot
    int numCustomers; // Total number of customers (excluding depot)
    int vehicleCapacity; // Capacity of the vehicle (identical for all vehicles)
    std::vector<int> demand;  // Demand of each node (with the depot at index 0 having a demand of 0)
    std::vector<std::vector<float>> distanceMatrix; //Distance matrix between nodes
    std::vector<std::vector<float>> nodePositions; // Node positions in 2D space
    std::vector<std::vector<int>> adj; // Adjacency list for each node, sorted by distance
    std::vector<float> prizes; // Prize of each node (0 for the depot)
}
```

From `Solution.h`:

```cpp
struct Solution {
    const Instance& instance; // Reference to the instance to avoid copying
    float totalCosts; // Total cost of the solution
    std::vector<Tour> tours; // List of tours in the solution
    std::vector<int> customerToTourMap; // Map from each customer to its tour index. This can be used to
    // quickly find which tour a customer belongs to, e.g. solution.tours[solution.customerToTourMap[c]] returns the tour of customer c.
    // Customers that are not visited map to -1.
}
```

From `Tour.h`:

```cpp
struct Tour {
    std::vector<int> customers; // Customers in the tour, excluding depot
    int demand = 0; // Total demand of the tour
    float costs = 0;  // Total cost of the tour including distance to and from the depot
}
```

From `Utils.h`:
```cpp
int getRandomNumber(int min, int max);
float getRandomFraction(float min = 0.0, float max = 1.0);
float getRandomFractionFast(); // Function to generate a random fraction (float) in the range [0, 1] using a fast method
std::vector<int> argsort(const std::vector<float>& values); // Function to perform argsort on a vector of float values
```)PROMPT";

const std::string_view kSeedCode = R"PROMPT(#include "AgentDesigned.h"
#include <random>
#include <unordered_set>
#include "Utils.h"

// Customer selection
std::vector<int> select_by_llm_1(const Solution& sol) {
    // random selection of customers
        std::unordered_set<int> selectedCustomers;

        int numCustomersToRemove = getRandomNumber(10, 20);

        while (selectedCustomers.size() < numCustomersToRemove) {
            int randomCustomer = getRandomNumber(1, sol.instance.numCustomers);
            selectedCustomers.insert(randomCustomer);
        }

        return std::vector<int>(selectedCustomers.begin(), selectedCustomers.end());
}


// Function selecting the order in which to remove the customers
void sort_by_llm_1(std::vector<int>& customers, const Instance& instance) {
    // Placeholder for LLM-based sorting logic
    // This function should implement the logic to sort customers based on a learned model
    // For now, we will just sort randomly as a placeholder
    // sort_randomly(customers, instance);
    static thread_local std::mt19937 gen(std::random_device{}());
    std::shuffle(customers.begin(), customers.end(), gen);
})PROMPT";

} // namespace vrpagent::prompts
