#include <iostream>

#include "poisonbench/cli.hpp"

int main(int argc, char** argv) { return poisonbench::run_cli(argc, argv, std::cout, std::cerr); }
