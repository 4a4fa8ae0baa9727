#include "vrpagent/eval/shim_adapter.hpp"

int main(int argc, char** argv) { return vrpagent::run_candidate_main(argc, argv); }
