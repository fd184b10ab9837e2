#include <iostream>

#include "qpt/cli.hpp"

int main(int argc, char** argv) { return qpt::run_cli(argc, argv, std::cout, std::cerr); }
