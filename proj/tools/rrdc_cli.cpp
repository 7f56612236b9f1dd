#include <iostream>

#include "rrdc/cli.hpp"

int main(int argc, char** argv) { return rrdc::cli::run_cli(argc, argv, std::cout, std::cerr); }
