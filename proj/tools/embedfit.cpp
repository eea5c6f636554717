#include <iostream>

#include "embedfit/cli.hpp"

int main(int argc, char** argv) { return embedfit::run_cli(argc, argv, std::cout, std::cerr); }
