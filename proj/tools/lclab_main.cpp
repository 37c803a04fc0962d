#include <iostream>

#include "lclab/cli.hpp"

int main(int argc, char** argv) { return lclab::run_cli(argc, argv, std::cout, std::cerr); }
