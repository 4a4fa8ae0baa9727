#pragma once

#include <vector>

struct Instance {
    int numNodes = 0;
    int numCustomers = 0;
    int vehicleCapacity = 0;
    std::vector<int> demand;
    std::vector<std::vector<float>> distanceMatrix;
    std::vector<std::vector<float>> nodePositions;
    std::vector<std::vector<int>> adj;
    std::vector<float> startTW;
    std::vector<float> endTW;
    std::vector<float> serviceTime;
    std::vector<float> prizes;
};
