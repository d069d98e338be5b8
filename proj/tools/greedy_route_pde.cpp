#include <iostream>

#include "grpde/cli/commands.hpp"

int main(int argc, char** argv) { return grpde::cli::run_cli(argc, argv, std::cout, std::cerr); }
