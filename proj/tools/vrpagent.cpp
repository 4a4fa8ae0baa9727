#include "vrpagent/cli/commands.hpp"

#include <iostream>

int main(int argc, char** argv) { return vrpagent::run_cli(argc, argv, std::cout, std::cerr); }
