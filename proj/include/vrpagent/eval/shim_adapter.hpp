#pragma once

#include "vrpagent/operators/operator_pair.hpp"

namespace vrpagent {

/// Wraps the candidate's select_by_llm_1 / sort_by_llm_1 as an operator pair.
/// Only linkable into candidate runner binaries.
OperatorPair make_candidate_pair(const Instance& instance);

/// Runner entry point: argv[1] is a child manifest; result records go to stdout.
int run_candidate_main(int argc, char** argv);

} // namespace vrpagent
