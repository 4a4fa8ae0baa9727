#pragma once

#include "Instance.h"
#include "Tour.h"

#include <vector>

struct Solution {
    const Instance& instance;
    float totalCosts = 0;
    std::vector<Tour> tours;
    std::vector<int> customerToTourMap;  // -1 for customers not in any tour
};
