#include "shrinknet/cli.hpp"

#include <iostream>

int main(int argc, char** argv) { return shrinknet::run_cli(argc, argv, std::cout, std::cerr); }
