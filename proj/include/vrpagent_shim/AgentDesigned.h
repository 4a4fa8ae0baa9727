#pragma once

// Interface version of the operator shim; bump on any change to these headers.
#define VRPAGENT_SHIM_VERSION 1

#include "Instance.h"
#include "Solution.h"
#include "Tour.h"
#include "Utils.h"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <numeric>
#include <unordered_set>
#include <vector>

std::vector<int> select_by_llm_1(const Solution& sol);
void sort_by_llm_1(std::vector<int>& customers, const Instance& instance);
