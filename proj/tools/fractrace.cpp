#include <iostream>

#include "fractrace/cli.hpp"

int main(int argc, char** argv) { return fractrace::cli::run_cli(argc, argv, std::cout, std::cerr); }
