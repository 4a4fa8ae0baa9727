#pragma once

#include <vector>

struct Tour {
    std::vector<int> customers;
    int demand = 0;
    float costs = 0;
};
